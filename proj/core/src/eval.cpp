#include "mfm/eval.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mfm/error.hpp"
#include "mfm/random.hpp"

namespace mfm {

std::string_view to_string(EvalScope s) noexcept { return s == EvalScope::all ? "all" : "covered_only"; }

std::optional<EvalScope> parse_scope(std::string_view s) noexcept {
  if (s == "all") return EvalScope::all;
  if (s == "covered_only" || s == "covered") return EvalScope::covered_only;
  return std::nullopt;
}

bool lenient_match(Label gold, const Prediction& prediction) noexcept { return prediction.labels.contains(gold); }

void ConfusionCounts::add(Label gold, const Prediction& prediction, EvalScope scope) {
  if (!is_foundation(gold)) {
    throw ValidationError("document " + prediction.doc_id + ": benchmark gold label must be a foundation, got " +
                          std::string(to_string(gold)));
  }
  ++n_documents;
  const bool covered = is_covered(prediction);
  if (covered) ++n_covered;
  if (scope == EvalScope::covered_only && !covered) return;
  ++n_scope;
  if (lenient_match(gold, prediction)) ++n_correct;
  const auto g = index_of(gold);
  ++support[g];
  for (std::size_t c = 0; c < kFoundationCount; ++c) {
    const bool predicted = prediction.labels.contains(kFoundations[c]);
    if (c == g) {
      (predicted ? tp : fn)[c] += 1;
    } else if (predicted) {
      ++fp[c];
    }
  }
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) noexcept {
  for (std::size_t c = 0; c < kFoundationCount; ++c) {
    tp[c] += o.tp[c];
    fp[c] += o.fp[c];
    fn[c] += o.fn[c];
    support[c] += o.support[c];
  }
  n_documents += o.n_documents;
  n_covered += o.n_covered;
  n_scope += o.n_scope;
  n_correct += o.n_correct;
  return *this;
}

namespace {

double ratio(std::size_t num, std::size_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics metrics(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t support) noexcept {
  ClassMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.support = support;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

}  // namespace

EvalReport finalize(const ConfusionCounts& counts, EvalScope scope) {
  EvalReport r;
  r.scope = scope;
  r.n_documents = counts.n_documents;
  r.n_covered = counts.n_covered;
  r.n_scope = counts.n_scope;
  r.coverage = ratio(counts.n_covered, counts.n_documents);
  r.empty_scope = counts.n_scope == 0;
  for (std::size_t c = 0; c < kFoundationCount; ++c) {
    r.per_class[c] = metrics(counts.tp[c], counts.fp[c], counts.fn[c], counts.support[c]);
  }
  if (r.empty_scope) return r;
  r.accuracy = ratio(counts.n_correct, counts.n_scope);
  double weighted = 0.0;
  double macro = 0.0;
  for (const auto& m : r.per_class) {
    weighted += m.f1 * static_cast<double>(m.support);
    macro += m.f1;
  }
  r.f1_weighted = weighted / static_cast<double>(counts.n_scope);
  r.f1_macro = macro / static_cast<double>(kFoundationCount);
  return r;
}

namespace {

// Pairs every benchmark document with its prediction; validates the 1:1 mapping.
std::vector<const Prediction*> align(const Dataset& bench, std::span<const Prediction> predictions) {
  std::unordered_map<std::string_view, const Prediction*> by_id;
  by_id.reserve(predictions.size());
  for (const auto& p : predictions) {
    if (!bench.contains(p.doc_id)) throw ValidationError("prediction for unknown document " + p.doc_id);
    if (!by_id.emplace(p.doc_id, &p).second) throw ValidationError("duplicate prediction for document " + p.doc_id);
  }
  std::vector<const Prediction*> aligned;
  aligned.reserve(bench.size());
  for (const auto& d : bench.documents()) {
    auto it = by_id.find(d.id);
    if (it == by_id.end()) throw ValidationError("missing prediction for document " + d.id);
    aligned.push_back(it->second);
  }
  return aligned;
}

}  // namespace

EvalReport evaluate(const Dataset& bench, std::span<const Prediction> predictions, EvalScope scope) {
  auto aligned = align(bench, predictions);
  ConfusionCounts counts;
  for (std::size_t i = 0; i < bench.size(); ++i) counts.add(bench[i].gold, *aligned[i], scope);
  auto report = finalize(counts, scope);
  if (report.empty_scope) spdlog::warn("evaluate: no covered documents in {} scope", to_string(scope));
  return report;
}

ClassPrior ClassPrior::from_counts(const ClassCounts& counts) {
  std::array<std::size_t, kFoundationCount> c{};
  for (std::size_t f = 0; f < kFoundationCount; ++f) c[f] = counts[kFoundations[f]];
  return from_counts(std::span<const std::size_t, kFoundationCount>(c));
}

ClassPrior ClassPrior::from_counts(std::span<const std::size_t, kFoundationCount> counts) {
  ClassPrior prior;
  for (auto n : counts) prior.n += n;
  if (prior.n == 0) throw ValidationError("class prior needs at least one foundation document");
  for (std::size_t f = 0; f < kFoundationCount; ++f) {
    prior.p[f] = static_cast<double>(counts[f]) / static_cast<double>(prior.n);
  }
  return prior;
}

EvalReport baseline_expected(const ClassPrior& prior) {
  double total = 0.0;
  for (double p : prior.p) {
    if (p < 0.0) throw ValidationError("class prior has a negative entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("class prior does not sum to 1");

  EvalReport r;
  r.scope = EvalScope::all;
  r.coverage = 1.0;
  r.n_documents = prior.n;
  r.n_covered = prior.n;
  r.n_scope = prior.n;
  double sum_sq = 0.0;
  double sum = 0.0;
  for (std::size_t f = 0; f < kFoundationCount; ++f) {
    auto& m = r.per_class[f];
    m.precision = m.recall = m.f1 = prior.p[f];
    m.support = static_cast<std::size_t>(std::llround(prior.p[f] * static_cast<double>(prior.n)));
    sum_sq += prior.p[f] * prior.p[f];
    sum += prior.p[f];
  }
  r.accuracy = sum_sq;
  r.f1_weighted = sum_sq;
  r.f1_macro = sum / static_cast<double>(kFoundationCount);
  return r;
}

BinaryReport evaluate_binary(const Dataset& bench, std::span<const Prediction> predictions, Label foundation) {
  if (!is_foundation(foundation)) throw ValidationError("evaluate_binary needs a foundation");
  auto aligned = align(bench, predictions);
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < bench.size(); ++i) {
    const bool gold = bench[i].gold == foundation;
    const bool pred = aligned[i]->labels.contains(foundation);
    if (gold && pred) ++tp;
    else if (gold) ++fn;
    else if (pred) ++fp;
    else ++tn;
  }
  BinaryReport r;
  r.foundation = foundation;
  r.n = bench.size();
  r.positive = metrics(tp, fp, fn, tp + fn);
  r.negative = metrics(tn, fn, fp, tn + fp);
  r.accuracy = ratio(tp + tn, r.n);
  r.f1_macro = (r.positive.f1 + r.negative.f1) / 2.0;
  r.f1_weighted = r.n == 0 ? 0.0
                           : (r.positive.f1 * static_cast<double>(r.positive.support) +
                              r.negative.f1 * static_cast<double>(r.negative.support)) /
                                 static_cast<double>(r.n);
  return r;
}

CurvePoint to_point(int batches_used, const EvalReport& report) {
  return {batches_used, report.accuracy, report.coverage, report.f1_weighted, report.f1_macro};
}

CurvePoint to_point(int batches_used, const BinaryReport& report) {
  return {batches_used, report.accuracy, 1.0, report.f1_weighted, report.f1_macro};
}

std::optional<int> batches_to_threshold(const LearningCurve& curve, double threshold) {
  if (curve.points.empty()) throw ValidationError("batches_to_threshold: empty curve");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("batches_to_threshold: threshold must lie in (0, 1)");
  for (const auto& p : curve.points) {
    if (p.f1_weighted >= threshold) return p.batches_used;
  }
  return std::nullopt;
}

MislabeledSample sample_mislabeled(const Dataset& bench, std::span<const Prediction> predictions, std::size_t n,
                                   std::optional<LabelSet> filter, std::uint64_t seed) {
  auto aligned = align(bench, predictions);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < bench.size(); ++i) {
    if (filter && !filter->contains(bench[i].gold)) continue;
    if (!lenient_match(bench[i].gold, *aligned[i])) candidates.push_back(i);
  }
  MislabeledSample out;
  if (candidates.size() < n) {
    out.warning = "requested " + std::to_string(n) + " mislabeled records but only " +
                  std::to_string(candidates.size()) + " are available";
    spdlog::warn("sample_mislabeled: {}", *out.warning);
  } else {
    auto rng = Rng::derive(seed, "mislabeled");
    rng.shuffle(std::span(candidates));
    candidates.resize(n);
    std::sort(candidates.begin(), candidates.end());
  }
  for (auto i : candidates) out.records.push_back({bench[i], *aligned[i]});
  return out;
}

}  // namespace mfm
