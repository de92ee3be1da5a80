#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfm/corpus.hpp"
#include "mfm/foundation.hpp"
#include "mfm/prediction.hpp"

namespace mfm {

/// Which documents enter the accuracy / F1 denominators. Coverage always
/// uses every document.
enum class EvalScope { covered_only, all };

std::string_view to_string(EvalScope s) noexcept;
std::optional<EvalScope> parse_scope(std::string_view s) noexcept;

/// A prediction is correct when the gold foundation is among its labels.
bool lenient_match(Label gold, const Prediction& prediction) noexcept;

/// A prediction covers its document when it carries at least one foundation.
inline bool is_covered(const Prediction& p) noexcept { return p.labels.has_foundation(); }

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Additive confusion state; partial tallies over disjoint document sets can
/// be merged with += and finalized once.
struct ConfusionCounts {
  std::array<std::size_t, kFoundationCount> tp{};
  std::array<std::size_t, kFoundationCount> fp{};
  std::array<std::size_t, kFoundationCount> fn{};
  std::array<std::size_t, kFoundationCount> support{};
  std::size_t n_documents = 0;
  std::size_t n_covered = 0;
  std::size_t n_scope = 0;
  std::size_t n_correct = 0;

  /// Adds one document. Gold must be a foundation.
  void add(Label gold, const Prediction& prediction, EvalScope scope);
  ConfusionCounts& operator+=(const ConfusionCounts& other) noexcept;
};

struct EvalReport {
  EvalScope scope = EvalScope::covered_only;
  /// Indexed by foundation (enum order).
  std::array<ClassMetrics, kFoundationCount> per_class{};
  double accuracy = 0.0;
  double coverage = 0.0;
  double f1_weighted = 0.0;
  double f1_macro = 0.0;
  std::size_t n_documents = 0;
  std::size_t n_covered = 0;
  /// Documents inside the scope; per-class supports sum to this.
  std::size_t n_scope = 0;
  /// Set when the scope is empty (e.g. nothing covered); all metrics are then 0.
  bool empty_scope = false;

  const ClassMetrics& operator[](Label f) const { return per_class[index_of(f)]; }
};

/// Precision/recall/F1 per class with zero-division mapped to 0; Fw weights
/// F1 by in-scope support, Fm is the plain mean over the five classes.
EvalReport finalize(const ConfusionCounts& counts, EvalScope scope);

/// Requires exactly one prediction per benchmark document (ValidationError on
/// duplicates, missing or unknown ids, or non-foundation gold labels).
EvalReport evaluate(const Dataset& bench, std::span<const Prediction> predictions,
                    EvalScope scope = EvalScope::covered_only);

/// Label-proportional class prior.
struct ClassPrior {
  FoundationArray p{};
  std::size_t n = 0;

  /// From foundation counts; throws when no foundation has a positive count.
  static ClassPrior from_counts(const ClassCounts& counts);
  static ClassPrior from_counts(std::span<const std::size_t, kFoundationCount> counts);
};

/// Expected metrics of guessing labels at random in proportion to the prior:
/// P = R = F1 = p_c per class, Acc = Fw = sum p_c^2, Fm = mean p_c, Cov = 1.
EvalReport baseline_expected(const ClassPrior& prior);

/// One foundation's binary view: gold = (label == f), prediction = f in labels.
struct BinaryReport {
  Label foundation = Label::care;
  ClassMetrics negative;  // class "0"
  ClassMetrics positive;  // class "1"
  double accuracy = 0.0;
  double f1_macro = 0.0;
  double f1_weighted = 0.0;
  std::size_t n = 0;
};

BinaryReport evaluate_binary(const Dataset& bench, std::span<const Prediction> predictions, Label foundation);

/// Summary metrics tracked along a learning curve.
struct CurvePoint {
  int batches_used = 0;
  double accuracy = 0.0;
  double coverage = 0.0;
  double f1_weighted = 0.0;
  double f1_macro = 0.0;
};

struct LearningCurve {
  std::string name;
  /// Set for per-foundation binary curves.
  std::optional<Label> foundation;
  /// Strictly increasing batches_used.
  std::vector<CurvePoint> points;
  /// batches_used values with no predictions file (not interpolated).
  std::vector<int> gaps;
};

CurvePoint to_point(int batches_used, const EvalReport& report);
CurvePoint to_point(int batches_used, const BinaryReport& report);

/// Smallest batches_used whose f1_weighted reaches `threshold` (first
/// crossing, not first sustained crossing). Throws on an empty curve or a
/// threshold outside (0, 1).
std::optional<int> batches_to_threshold(const LearningCurve& curve, double threshold);

struct MislabeledRecord {
  Document document;
  Prediction prediction;
};

struct MislabeledSample {
  std::vector<MislabeledRecord> records;
  /// Set when fewer than the requested number were available.
  std::optional<std::string> warning;
};

/// Uniform sample without replacement of documents failing lenient_match,
/// optionally restricted to gold labels in `filter`. Output is in benchmark order.
MislabeledSample sample_mislabeled(const Dataset& bench, std::span<const Prediction> predictions, std::size_t n,
                                   std::optional<LabelSet> filter, std::uint64_t seed);

}  // namespace mfm
