#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "mfm/foundation.hpp"
#include "mfm/prediction.hpp"
#include "mfm/segment.hpp"

namespace mfm {

enum class LexiconKind { count, probability };
enum class Polarity { virtue, vice };

std::string_view to_string(LexiconKind k) noexcept;
std::string_view to_string(Polarity p) noexcept;
std::optional<Polarity> parse_polarity(std::string_view s) noexcept;

struct CountEntry {
  Label foundation = Label::care;
  std::optional<Polarity> polarity;
  friend bool operator==(const CountEntry&, const CountEntry&) = default;
};

struct ProbabilityEntry {
  FoundationArray probability{};
  /// Extra columns carried by the file (e.g. sentiment), loaded but unused for labelling.
  std::vector<std::string> extra;
  friend bool operator==(const ProbabilityEntry&, const ProbabilityEntry&) = default;
};

struct LexiconEntry {
  /// Term as written, without the trailing '*'.
  std::string term;
  /// Original-MFD style "stem*": matches any token with this prefix.
  bool wildcard = false;
  std::variant<CountEntry, ProbabilityEntry> value;

  const CountEntry& count() const { return std::get<CountEntry>(value); }
  const ProbabilityEntry& probability() const { return std::get<ProbabilityEntry>(value); }
  friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

/// Term -> foundation dictionary. Immutable once handed to scorers.
class Lexicon {
 public:
  Lexicon(std::string name, LexiconKind kind) : name_(std::move(name)), kind_(kind) {}

  const std::string& name() const noexcept { return name_; }
  LexiconKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<LexiconEntry>& entries() const noexcept { return entries_; }
  /// Names of extra probability-file columns, in file order.
  const std::vector<std::string>& extra_columns() const noexcept { return extra_columns_; }
  void set_extra_columns(std::vector<std::string> names) { extra_columns_ = std::move(names); }

  /// `term` may end in '*'. Throws ValidationError on duplicates or kind mismatch.
  void add(std::string_view term, CountEntry entry);
  void add(std::string_view term, ProbabilityEntry entry);

  /// Exact match first, then the longest matching wildcard stem.
  const LexiconEntry* lookup(std::string_view token) const;

  /// Foundations with at least one entry.
  LabelSet foundations() const;

  /// Count lexicons only: copy with polarities replaced by `assign(term)`.
  template <typename F>
  Lexicon with_polarity(F&& assign) const {
    Lexicon out(name_, kind_);
    for (const auto& e : entries_) {
      CountEntry c = e.count();
      c.polarity = assign(e.term);
      out.add(e.wildcard ? e.term + "*" : e.term, c);
    }
    return out;
  }

 private:
  void insert(std::string_view term, std::variant<CountEntry, ProbabilityEntry> value);

  std::string name_;
  LexiconKind kind_;
  std::vector<LexiconEntry> entries_;
  std::vector<std::string> extra_columns_;
  std::unordered_map<std::string, std::size_t> exact_;
  std::unordered_map<std::string, std::size_t> stems_;
  std::vector<std::size_t> stem_lengths_;  // descending, distinct
};

/// Count kind: TSV term<TAB>foundation[<TAB>polarity]; '#' starts a comment
/// line; "care.virtue" is accepted in the foundation column.
/// Probability kind: CSV with header term,care,fairness,loyalty,authority,sanctity
/// (extra columns are kept). Errors carry line numbers.
Lexicon load_lexicon(const std::string& path, LexiconKind kind);
void save_lexicon(const Lexicon& lexicon, const std::string& path);

struct LexiconScore {
  /// Match counts (count kind) or probability sums (probability kind).
  FoundationArray per_foundation{};
  /// (term, foundation) -> occurrences. Probability entries are keyed under
  /// every foundation with a nonzero probability.
  std::map<std::pair<std::string, Label>, std::size_t> matched_terms;
  /// Number of matched tokens.
  std::size_t total_matches = 0;
};

/// Accumulates lexicon hits. Per-term occurrence counts are gathered first
/// and summed in term order, so scores do not depend on token order.
LexiconScore score_tokens(std::span<const std::string> tokens, const Lexicon& lexicon);

/// All foundations attaining the maximum; empty when the maximum is not positive.
LabelSet argmax_set(const FoundationArray& scores);

/// Most-frequent-foundation labelling; ties keep every tied foundation;
/// no hits gives {none}. Scores carry raw counts.
Prediction score_count(const TokenSequence& tokens, const Lexicon& lexicon, std::string doc_id = {});

/// Probability-sum labelling with the same tie and no-match rules.
Prediction score_prob(const TokenSequence& tokens, const Lexicon& lexicon, std::string doc_id = {});

}  // namespace mfm
