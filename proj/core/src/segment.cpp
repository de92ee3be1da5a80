#include "mfm/segment.hpp"

#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/unistr.h>
#include <unicode/utext.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <memory>

#include "mfm/error.hpp"

namespace mfm {

namespace {

// Length of the UTF-8 sequence starting at text[i]; malformed bytes count as 1.
std::size_t utf8_length(std::string_view text, std::size_t i) noexcept {
  auto c = static_cast<unsigned char>(text[i]);
  std::size_t n = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
  if (i + n > text.size()) return 1;
  for (std::size_t k = 1; k < n; ++k) {
    if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) return 1;
  }
  return n;
}

std::size_t count_code_points(std::string_view text) noexcept {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size(); i += utf8_length(text, i)) ++n;
  return n;
}

// ASCII whitespace, NBSP, ideographic space and the U+2000 block spaces.
std::size_t whitespace_length(std::string_view text, std::size_t i) noexcept {
  auto c = static_cast<unsigned char>(text[i]);
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') return 1;
  auto rest = text.substr(i);
  if (rest.starts_with("\xC2\xA0")) return 2;
  if (rest.starts_with("\xE3\x80\x80")) return 3;
  if (rest.size() >= 3 && static_cast<unsigned char>(rest[0]) == 0xE2 &&
      static_cast<unsigned char>(rest[1]) == 0x80) {
    auto b = static_cast<unsigned char>(rest[2]);
    if ((b >= 0x80 && b <= 0x8A) || b == 0xAF) return 3;
  }
  return 0;
}

bool is_ascii(std::string_view s) noexcept {
  return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

std::string lowercase(std::string_view s) {
  if (is_ascii(s)) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  }
  auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.toLower(icu::Locale::getRoot());
  std::string out;
  u.toUTF8String(out);
  return out;
}

struct UTextCloser {
  void operator()(UText* t) const noexcept { utext_close(t); }
};

// Creating a word BreakIterator loads rule data; clone one prototype per thread.
icu::BreakIterator& word_iterator() {
  static const std::unique_ptr<icu::BreakIterator> prototype = [] {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> it(icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
    if (U_FAILURE(status) || !it) throw Error(std::string("ICU word iterator: ") + u_errorName(status));
    return it;
  }();
  thread_local std::unique_ptr<icu::BreakIterator> local(prototype->clone());
  return *local;
}

}  // namespace

void Vocabulary::insert(std::string_view term) {
  if (term.empty()) return;
  for (std::size_t i = 0; i < term.size(); ++i) {
    if (whitespace_length(term, i)) return;
  }
  if (terms_.emplace(term).second) max_length_ = std::max(max_length_, count_code_points(term));
}

Vocabulary Vocabulary::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  Vocabulary v;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    first = false;
    auto end = line.find_first_of(" \t\r");
    v.insert(std::string_view(line).substr(0, end));
  }
  return v;
}

bool is_chinese(std::string_view tag) noexcept {
  std::string lower(tag.substr(0, std::min<std::size_t>(tag.size(), 3)));
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto primary = lower.substr(0, lower.find_first_of("-_"));
  return primary == "zh" || primary == "cmn" || primary == "yue" || primary == "wuu";
}

TokenSequence tokenize(std::string_view text, std::string_view language, const Vocabulary* vocabulary) {
  if (is_chinese(language)) {
    static const Vocabulary kEmpty;
    return segment_max_match(text, vocabulary ? *vocabulary : kEmpty);
  }
  return tokenize_words(text);
}

TokenSequence tokenize_words(std::string_view text) {
  TokenSequence out;
  if (text.empty()) return out;

  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<UText, UTextCloser> ut(
      utext_openUTF8(nullptr, text.data(), static_cast<int64_t>(text.size()), &status));
  if (U_FAILURE(status)) throw Error(std::string("ICU utext: ") + u_errorName(status));

  auto& it = word_iterator();
  it.setText(ut.get(), status);
  if (U_FAILURE(status)) throw Error(std::string("ICU setText: ") + u_errorName(status));

  int32_t start = it.first();
  for (int32_t end = it.next(); end != icu::BreakIterator::DONE; start = end, end = it.next()) {
    if (it.getRuleStatus() < UBRK_WORD_NONE_LIMIT) continue;  // spaces and punctuation
    auto b = static_cast<std::size_t>(start);
    auto e = static_cast<std::size_t>(end);
    out.tokens.push_back(lowercase(text.substr(b, e - b)));
    out.spans.push_back({b, e});
  }
  return out;
}

TokenSequence segment_max_match(std::string_view text, const Vocabulary& vocabulary) {
  TokenSequence out;
  // Code-point starts of the current whitespace-free run.
  std::vector<std::size_t> starts;
  std::size_t i = 0;
  while (i < text.size()) {
    if (auto ws = whitespace_length(text, i)) {
      i += ws;
      continue;
    }
    starts.clear();
    std::size_t j = i;
    while (j < text.size() && !whitespace_length(text, j)) {
      starts.push_back(j);
      j += utf8_length(text, j);
    }
    const std::size_t run_end = j;
    starts.push_back(run_end);

    const std::size_t n = starts.size() - 1;
    std::size_t pos = 0;
    while (pos < n) {
      std::size_t take = 1;
      for (std::size_t len = std::min(vocabulary.max_length(), n - pos); len > 1; --len) {
        if (vocabulary.contains(text.substr(starts[pos], starts[pos + len] - starts[pos]))) {
          take = len;
          break;
        }
      }
      std::size_t b = starts[pos];
      std::size_t e = starts[pos + take];
      out.tokens.emplace_back(text.substr(b, e - b));
      out.spans.push_back({b, e});
      pos += take;
    }
    i = run_end;
  }
  return out;
}

TokenSequence from_tokens(std::span<const std::string> tokens) {
  TokenSequence out;
  std::size_t offset = 0;
  for (const auto& t : tokens) {
    out.tokens.push_back(t);
    out.spans.push_back({offset, offset + t.size()});
    offset += t.size() + 1;
  }
  return out;
}

}  // namespace mfm
