#include "mfm/lexicon.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "mfm/csv.hpp"
#include "mfm/error.hpp"
#include "text_util.hpp"

namespace mfm {

std::string_view to_string(LexiconKind k) noexcept {
  return k == LexiconKind::count ? "count" : "probability";
}

std::string_view to_string(Polarity p) noexcept { return p == Polarity::virtue ? "virtue" : "vice"; }

std::optional<Polarity> parse_polarity(std::string_view s) noexcept {
  s = detail::trim(s);
  if (s == "virtue" || s == "+") return Polarity::virtue;
  if (s == "vice" || s == "-") return Polarity::vice;
  return std::nullopt;
}

void Lexicon::add(std::string_view term, CountEntry entry) {
  if (kind_ != LexiconKind::count) throw ValidationError(name_ + ": count entry added to a probability lexicon");
  if (!is_foundation(entry.foundation)) {
    throw ValidationError(name_ + ": term " + std::string(term) + " must map to a moral foundation");
  }
  insert(term, entry);
}

void Lexicon::add(std::string_view term, ProbabilityEntry entry) {
  if (kind_ != LexiconKind::probability) throw ValidationError(name_ + ": probability entry added to a count lexicon");
  for (std::size_t i = 0; i < kFoundationCount; ++i) {
    double p = entry.probability[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError(name_ + ": probability " + detail::format_number(p) + " for " +
                            std::string(to_string(kFoundations[i])) + " of term " + std::string(term) +
                            " is outside [0, 1]");
    }
  }
  insert(term, std::move(entry));
}

void Lexicon::insert(std::string_view raw, std::variant<CountEntry, ProbabilityEntry> value) {
  LexiconEntry e;
  e.wildcard = raw.size() > 1 && raw.back() == '*';
  e.term = std::string(e.wildcard ? raw.substr(0, raw.size() - 1) : raw);
  if (e.term.empty()) throw ValidationError(name_ + ": empty term");
  e.value = std::move(value);
  auto& index = e.wildcard ? stems_ : exact_;
  if (index.contains(e.term)) throw ValidationError(name_ + ": duplicate term " + std::string(raw));
  index.emplace(e.term, entries_.size());
  if (e.wildcard && std::find(stem_lengths_.begin(), stem_lengths_.end(), e.term.size()) == stem_lengths_.end()) {
    stem_lengths_.push_back(e.term.size());
    std::sort(stem_lengths_.begin(), stem_lengths_.end(), std::greater<>());
  }
  entries_.push_back(std::move(e));
}

const LexiconEntry* Lexicon::lookup(std::string_view token) const {
  if (auto it = exact_.find(std::string(token)); it != exact_.end()) return &entries_[it->second];
  for (std::size_t len : stem_lengths_) {
    if (len > token.size()) continue;
    if (auto it = stems_.find(std::string(token.substr(0, len))); it != stems_.end()) return &entries_[it->second];
  }
  return nullptr;
}

LabelSet Lexicon::foundations() const {
  LabelSet out;
  for (const auto& e : entries_) {
    if (kind_ == LexiconKind::count) {
      out.insert(e.count().foundation);
    } else {
      for (std::size_t i = 0; i < kFoundationCount; ++i) {
        if (e.probability().probability[i] > 0.0) out.insert(kFoundations[i]);
      }
    }
  }
  return out;
}

namespace {

Lexicon load_count(const std::string& path) {
  Lexicon lex(std::filesystem::path(path).stem().string(), LexiconKind::count);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    auto fields = detail::split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(path, lineno, "expected term<TAB>foundation[<TAB>polarity], got " +
                                         std::to_string(fields.size()) + " fields");
    }
    auto term = detail::trim(fields[0]);
    auto found = detail::trim(fields[1]);
    CountEntry entry;
    // MFD2 distributes "care.virtue" style categories.
    if (auto dot = found.find('.'); dot != std::string_view::npos) {
      auto pol = parse_polarity(found.substr(dot + 1));
      if (!pol) throw ParseError(path, lineno, "unknown polarity in \"" + std::string(found) + "\"");
      entry.polarity = pol;
      found = found.substr(0, dot);
    }
    auto label = parse_label(found);
    if (!label || !is_foundation(*label)) {
      throw ParseError(path, lineno, "unknown foundation \"" + std::string(found) + "\"");
    }
    entry.foundation = *label;
    if (fields.size() == 3 && !detail::trim(fields[2]).empty()) {
      auto pol = parse_polarity(fields[2]);
      if (!pol) throw ParseError(path, lineno, "unknown polarity \"" + std::string(fields[2]) + "\"");
      entry.polarity = pol;
    }
    try {
      lex.add(term, entry);
    } catch (const ValidationError& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  return lex;
}

Lexicon load_probability(const std::string& path) {
  Lexicon lex(std::filesystem::path(path).stem().string(), LexiconKind::probability);
  auto records = csv::parse(csv::read_file(path), path);
  if (records.empty()) throw ParseError(path, 1, "missing header row");
  const auto& header = records.front().fields;
  std::optional<std::size_t> term_col;
  std::array<std::optional<std::size_t>, kFoundationCount> cols;
  std::vector<std::size_t> extra_cols;
  std::vector<std::string> extra_names;
  for (std::size_t i = 0; i < header.size(); ++i) {
    auto name = detail::trim(header[i]);
    if (name == "term" || name == "word") {
      term_col = i;
      continue;
    }
    bool matched = false;
    for (std::size_t f = 0; f < kFoundationCount; ++f) {
      if (name == to_string(kFoundations[f])) {
        cols[f] = i;
        matched = true;
      }
    }
    if (!matched) {
      extra_cols.push_back(i);
      extra_names.emplace_back(name);
    }
  }
  if (!term_col) throw ParseError(path, records.front().line, "header lacks a term column");
  for (std::size_t f = 0; f < kFoundationCount; ++f) {
    if (!cols[f]) {
      throw ParseError(path, records.front().line,
                       "header lacks the " + std::string(to_string(kFoundations[f])) + " column");
    }
  }
  lex.set_extra_columns(extra_names);

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
    if (rec.fields.size() != header.size()) {
      throw ParseError(path, rec.line,
                       "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(rec.fields.size()));
    }
    ProbabilityEntry entry;
    for (std::size_t f = 0; f < kFoundationCount; ++f) {
      auto v = detail::parse_number<double>(rec.fields[*cols[f]]);
      if (!v) throw ParseError(path, rec.line, "not a number: \"" + rec.fields[*cols[f]] + "\"");
      entry.probability[f] = *v;
    }
    for (auto c : extra_cols) entry.extra.push_back(rec.fields[c]);
    try {
      lex.add(detail::trim(rec.fields[*term_col]), std::move(entry));
    } catch (const ValidationError& e) {
      throw ParseError(path, rec.line, e.what());
    }
  }
  return lex;
}

}  // namespace

Lexicon load_lexicon(const std::string& path, LexiconKind kind) {
  return kind == LexiconKind::count ? load_count(path) : load_probability(path);
}

void save_lexicon(const Lexicon& lexicon, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  if (lexicon.kind() == LexiconKind::count) {
    for (const auto& e : lexicon.entries()) {
      out << e.term << (e.wildcard ? "*" : "") << '\t' << to_string(e.count().foundation);
      if (e.count().polarity) out << '\t' << to_string(*e.count().polarity);
      out << '\n';
    }
  } else {
    std::vector<std::string> header{"term"};
    for (Label f : kFoundations) header.emplace_back(to_string(f));
    header.insert(header.end(), lexicon.extra_columns().begin(), lexicon.extra_columns().end());
    csv::write_row(out, header);
    for (const auto& e : lexicon.entries()) {
      std::vector<std::string> row{e.term + (e.wildcard ? "*" : "")};
      for (double p : e.probability().probability) row.push_back(detail::format_number(p));
      row.insert(row.end(), e.probability().extra.begin(), e.probability().extra.end());
      csv::write_row(out, row);
    }
  }
  if (!out) throw Error("write failed: " + path);
}

LexiconScore score_tokens(std::span<const std::string> tokens, const Lexicon& lexicon) {
  // entry index -> occurrences; std::map keeps summation order fixed.
  std::map<std::size_t, std::size_t> hits;
  const auto* base = lexicon.entries().data();
  for (const auto& t : tokens) {
    if (const auto* e = lexicon.lookup(t)) ++hits[static_cast<std::size_t>(e - base)];
  }

  LexiconScore score;
  for (const auto& [idx, n] : hits) {
    const auto& e = lexicon.entries()[idx];
    score.total_matches += n;
    if (lexicon.kind() == LexiconKind::count) {
      score.per_foundation[index_of(e.count().foundation)] += static_cast<double>(n);
      score.matched_terms[{e.term, e.count().foundation}] += n;
    } else {
      for (std::size_t f = 0; f < kFoundationCount; ++f) {
        double p = e.probability().probability[f];
        score.per_foundation[f] += static_cast<double>(n) * p;
        if (p > 0.0) score.matched_terms[{e.term, kFoundations[f]}] += n;
      }
    }
  }
  return score;
}

LabelSet argmax_set(const FoundationArray& scores) {
  double best = *std::max_element(scores.begin(), scores.end());
  LabelSet out;
  if (!(best > 0.0)) return out;
  for (std::size_t f = 0; f < kFoundationCount; ++f) {
    if (scores[f] == best) out.insert(kFoundations[f]);
  }
  return out;
}

namespace {

Prediction label_from_score(const LexiconScore& score, std::string doc_id, std::string approach) {
  Prediction p;
  p.doc_id = std::move(doc_id);
  p.approach = std::move(approach);
  for (std::size_t f = 0; f < kFoundationCount; ++f) p.scores[kFoundations[f]] = score.per_foundation[f];
  p.labels = argmax_set(score.per_foundation);
  if (p.labels.empty()) p.labels.insert(Label::none);
  return p;
}

}  // namespace

Prediction score_count(const TokenSequence& tokens, const Lexicon& lexicon, std::string doc_id) {
  if (lexicon.kind() != LexiconKind::count) throw ValidationError("score_count requires a count lexicon");
  return label_from_score(score_tokens(tokens.tokens, lexicon), std::move(doc_id), "lexicon_count:" + lexicon.name());
}

Prediction score_prob(const TokenSequence& tokens, const Lexicon& lexicon, std::string doc_id) {
  if (lexicon.kind() != LexiconKind::probability) throw ValidationError("score_prob requires a probability lexicon");
  return label_from_score(score_tokens(tokens.tokens, lexicon), std::move(doc_id), "lexicon_prob:" + lexicon.name());
}

}  // namespace mfm
