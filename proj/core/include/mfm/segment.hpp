#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace mfm {

/// Byte offsets [begin, end) of a token in its source text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<Span> spans;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
};

/// Word list for the longest-match segmenter.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::initializer_list<std::string_view> terms) {
    for (auto t : terms) insert(t);
  }

  /// Terms containing whitespace are ignored: the segmenter never matches across spaces.
  void insert(std::string_view term);
  bool contains(std::string_view term) const { return terms_.contains(std::string(term)); }
  std::size_t size() const noexcept { return terms_.size(); }
  /// Longest term, in code points.
  std::size_t max_length() const noexcept { return max_length_; }

  /// One term per line; only the first whitespace-separated field is used,
  /// so frequency-annotated word lists load unchanged.
  static Vocabulary from_file(const std::string& path);

 private:
  std::unordered_set<std::string> terms_;
  std::size_t max_length_ = 0;
};

/// True for Chinese language tags ("zh", "zh-CN", "zh-Hans", "cmn", ...).
bool is_chinese(std::string_view language_tag) noexcept;

/// Dispatches on the language tag: Chinese text goes through greedy forward
/// maximum matching against `vocabulary`; everything else through Unicode
/// word boundaries with lowercasing.
TokenSequence tokenize(std::string_view text, std::string_view language,
                       const Vocabulary* vocabulary = nullptr);

/// UAX #29 word segmentation (ICU), keeping only word-like segments, lowercased.
TokenSequence tokenize_words(std::string_view text);

/// Greedy forward maximum matching. Whitespace separates runs and is dropped;
/// unmatched positions fall back to single code points.
TokenSequence segment_max_match(std::string_view text, const Vocabulary& vocabulary);

/// Wraps caller-supplied tokens; spans index into the space-joined string.
TokenSequence from_tokens(std::span<const std::string> tokens);

}  // namespace mfm
