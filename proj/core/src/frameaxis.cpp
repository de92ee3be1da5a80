#include "mfm/frameaxis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "mfm/error.hpp"
#include "mfm/random.hpp"
#include "text_util.hpp"

namespace mfm {

std::vector<MicroFrame> build_microframes(const Lexicon& lexicon, const EmbeddingStore& store) {
  if (lexicon.kind() != LexiconKind::count) throw ValidationError("micro-frames need a count lexicon");
  std::array<MicroFrame, kFoundationCount> frames;
  for (std::size_t f = 0; f < kFoundationCount; ++f) frames[f].foundation = kFoundations[f];
  for (const auto& e : lexicon.entries()) {
    const auto& c = e.count();
    if (!c.polarity || !store.contains(e.term)) continue;
    auto& frame = frames[index_of(c.foundation)];
    (*c.polarity == Polarity::virtue ? frame.virtue_terms : frame.vice_terms).push_back(e.term);
  }
  std::vector<MicroFrame> out;
  for (auto& frame : frames) {
    const std::string name(to_string(frame.foundation));
    if (frame.virtue_terms.empty()) throw ValidationError("micro-frame " + name + ": virtue pole has no in-vocabulary term");
    if (frame.vice_terms.empty()) throw ValidationError("micro-frame " + name + ": vice pole has no in-vocabulary term");
    auto virtue = *mean_vector(frame.virtue_terms, store);
    auto vice = *mean_vector(frame.vice_terms, store);
    frame.axis.resize(store.dimension());
    for (std::size_t i = 0; i < frame.axis.size(); ++i) frame.axis[i] = vice[i] - virtue[i];
    double n = norm(frame.axis);
    if (n == 0.0) throw ValidationError("micro-frame " + name + ": virtue and vice centroids coincide");
    for (auto& x : frame.axis) x /= n;
    out.push_back(std::move(frame));
  }
  return out;
}

double contribution(const EmbeddingStore& store, std::size_t row, const MicroFrame& frame) noexcept {
  double n = store.norm(row);
  if (n == 0.0) return 0.0;
  return std::clamp(dot(store.vector(row), frame.axis) / n, -1.0, 1.0);
}

std::optional<double> frame_bias(std::span<const std::string> tokens, const EmbeddingStore& store,
                                 const MicroFrame& frame) {
  // Aggregate by row first so the sum does not depend on token order.
  std::map<std::size_t, std::size_t> counts;
  for (const auto& t : tokens) {
    if (auto row = store.index(t)) ++counts[*row];
  }
  if (counts.empty()) return std::nullopt;
  double weighted = 0.0;
  std::size_t total = 0;
  for (const auto& [row, n] : counts) {
    weighted += static_cast<double>(n) * contribution(store, row, frame);
    total += n;
  }
  return weighted / static_cast<double>(total);
}

NullModel build_null_model(std::span<const std::string> background, const EmbeddingStore& store,
                           const MicroFrame& frame, std::size_t sample_size, std::size_t bootstrap,
                           std::uint64_t seed, unsigned threads) {
  if (bootstrap < kMinBootstrap) {
    throw ValidationError("null model needs at least " + std::to_string(kMinBootstrap) +
                          " bootstrap samples, got " + std::to_string(bootstrap));
  }
  if (sample_size == 0) throw ValidationError("null model sample size must be positive");
  std::vector<double> pool;
  pool.reserve(background.size());
  for (const auto& t : background) {
    if (auto row = store.index(t)) pool.push_back(contribution(store, *row, frame));
  }
  if (pool.size() < sample_size) {
    throw ValidationError("null model background has " + std::to_string(pool.size()) +
                          " in-vocabulary tokens, fewer than the sample size " + std::to_string(sample_size));
  }

  const std::uint64_t frame_seed = splitmix64(seed ^ (0x9E37ULL + index_of(frame.foundation)));
  std::vector<double> biases(bootstrap);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      auto rng = Rng::derive(frame_seed, b);
      double sum = 0.0;
      for (std::size_t k = 0; k < sample_size; ++k) sum += pool[rng.below(pool.size())];
      biases[b] = sum / static_cast<double>(sample_size);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(bootstrap)));
  if (threads == 1) {
    run(0, bootstrap);
  } else {
    std::vector<std::jthread> workers;
    std::size_t chunk = (bootstrap + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      std::size_t begin = t * chunk;
      std::size_t end = std::min(bootstrap, begin + chunk);
      if (begin < end) workers.emplace_back(run, begin, end);
    }
  }

  NullModel null;
  null.foundation = frame.foundation;
  null.sample_size = sample_size;
  null.bootstrap = bootstrap;
  null.seed = seed;
  auto [lo, hi] = std::minmax_element(biases.begin(), biases.end());
  if (*lo == *hi) {
    null.mean = *lo;
    null.stdev = 0.0;
    return null;
  }
  double mean = 0.0;
  for (double x : biases) mean += x;
  mean /= static_cast<double>(bootstrap);
  double ss = 0.0;
  for (double x : biases) ss += (x - mean) * (x - mean);
  null.mean = mean;
  null.stdev = std::sqrt(ss / static_cast<double>(bootstrap - 1));
  return null;
}

std::size_t null_sample_size(std::size_t in_vocab_tokens, const FrameAxisParams& params) noexcept {
  return std::clamp(in_vocab_tokens, params.min_sample, params.max_sample);
}

std::pair<FrameAxisScore, Prediction> frameaxis_score(std::span<const std::string> tokens,
                                                      const EmbeddingStore& store,
                                                      std::span<const MicroFrame> frames,
                                                      std::span<const NullModel> nulls, double z_crit,
                                                      std::string doc_id) {
  const std::string approach = "frameaxis";
  FrameAxisScore score;
  for (const auto& t : tokens) score.in_vocab_tokens += store.contains(t) ? 1 : 0;
  if (score.in_vocab_tokens == 0) return {score, make_unknown(std::move(doc_id), approach)};

  Prediction p;
  p.doc_id = std::move(doc_id);
  p.approach = approach;
  for (const auto& frame : frames) {
    const auto f = index_of(frame.foundation);
    auto null = std::find_if(nulls.begin(), nulls.end(),
                             [&](const NullModel& n) { return n.foundation == frame.foundation; });
    if (null == nulls.end()) {
      throw ValidationError("no null model for frame " + std::string(to_string(frame.foundation)));
    }
    score.bias[f] = *frame_bias(tokens, store, frame);
    score.z[f] = null->stdev > 0.0 ? (score.bias[f] - null->mean) / null->stdev : 0.0;
    score.significant[f] = std::abs(score.z[f]) >= z_crit;
    p.scores[frame.foundation] = score.z[f];
    if (score.significant[f]) p.labels.insert(frame.foundation);
  }
  if (p.labels.empty()) p.labels.insert(Label::none);
  return {score, std::move(p)};
}

FrameAxisScorer::FrameAxisScorer(const EmbeddingStore& store, std::vector<MicroFrame> frames,
                                 std::vector<std::string> background, FrameAxisParams params, std::string name)
    : store_(&store),
      frames_(std::move(frames)),
      background_(std::move(background)),
      params_(params),
      name_(std::move(name)) {
  if (params_.min_sample == 0 || params_.min_sample > params_.max_sample) {
    throw ValidationError("frameaxis: invalid sample-size clamp");
  }
  if (params_.bootstrap < kMinBootstrap) {
    throw ValidationError("frameaxis: bootstrap must be at least " + std::to_string(kMinBootstrap));
  }
}

std::vector<NullModel> FrameAxisScorer::nulls_for(std::size_t sample_size) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(sample_size); it != cache_.end()) return it->second;
  }
  // Built outside the lock; a racing duplicate build yields identical nulls.
  std::vector<NullModel> nulls;
  for (const auto& frame : frames_) {
    nulls.push_back(build_null_model(background_, *store_, frame, sample_size, params_.bootstrap, params_.seed,
                                     params_.threads));
  }
  std::lock_guard lock(mutex_);
  return cache_.emplace(sample_size, std::move(nulls)).first->second;
}

std::pair<FrameAxisScore, Prediction> FrameAxisScorer::score(std::span<const std::string> tokens,
                                                             std::string doc_id) const {
  std::size_t in_vocab = 0;
  for (const auto& t : tokens) in_vocab += store_->contains(t) ? 1 : 0;
  if (in_vocab == 0) {
    FrameAxisScore empty;
    return {empty, make_unknown(std::move(doc_id), name_)};
  }
  auto nulls = nulls_for(null_sample_size(in_vocab, params_));
  auto result = frameaxis_score(tokens, *store_, frames_, nulls, params_.z_crit, std::move(doc_id));
  result.second.approach = name_;
  return result;
}

std::unordered_map<std::string, double> load_sentiment_scores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::unordered_map<std::string, double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty() || line.front() == '#') continue;
    auto fields = detail::split(line, '\t');
    if (fields.size() != 2) throw ParseError(path, lineno, "expected term<TAB>score");
    auto score = detail::parse_number<double>(fields[1]);
    if (!score) throw ParseError(path, lineno, "not a number: \"" + std::string(fields[1]) + "\"");
    if (*score < 0.0 || *score > 1.0) throw ParseError(path, lineno, "sentiment score outside [0, 1]");
    if (!out.emplace(std::string(detail::trim(fields[0])), *score).second) {
      throw ParseError(path, lineno, "duplicate term " + std::string(fields[0]));
    }
  }
  return out;
}

Lexicon assign_polarity(const Lexicon& lexicon, const std::unordered_map<std::string, double>& scores,
                        double threshold) {
  return lexicon.with_polarity([&](const std::string& term) -> std::optional<Polarity> {
    auto it = scores.find(term);
    if (it == scores.end()) return std::nullopt;
    return it->second >= threshold ? Polarity::virtue : Polarity::vice;
  });
}

}  // namespace mfm
