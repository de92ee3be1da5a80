#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mfm/embed.hpp"
#include "mfm/lexicon.hpp"
#include "mfm/prediction.hpp"

namespace mfm {

/// One virtue/vice axis per foundation.
struct MicroFrame {
  Label foundation = Label::care;
  /// normalize(mean(vice vectors) - mean(virtue vectors)).
  DenseVector axis;
  std::vector<std::string> virtue_terms;
  std::vector<std::string> vice_terms;
};

/// Builds the five frames from a count lexicon whose entries carry polarity.
/// Terms without polarity or out of vocabulary are ignored. Throws
/// ValidationError naming the foundation and pole when a pole ends up empty.
std::vector<MicroFrame> build_microframes(const Lexicon& lexicon, const EmbeddingStore& store);

/// cosine(token vector, axis) for an in-vocabulary, nonzero row.
double contribution(const EmbeddingStore& store, std::size_t row, const MicroFrame& frame) noexcept;

/// Occurrence-weighted mean contribution over in-vocabulary tokens; nullopt
/// when no token is in vocabulary.
std::optional<double> frame_bias(std::span<const std::string> tokens, const EmbeddingStore& store,
                                 const MicroFrame& frame);

struct NullModel {
  Label foundation = Label::care;
  std::size_t sample_size = 0;
  double mean = 0.0;
  double stdev = 0.0;
  std::size_t bootstrap = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMinBootstrap = 100;

/// Bootstrap distribution of the bias of `bootstrap` pseudo-documents of
/// `sample_size` tokens drawn uniformly with replacement from the in-vocabulary
/// background tokens. Sample b uses its own derived seed, so `threads` does not
/// change the result.
NullModel build_null_model(std::span<const std::string> background, const EmbeddingStore& store,
                           const MicroFrame& frame, std::size_t sample_size, std::size_t bootstrap,
                           std::uint64_t seed, unsigned threads = 1);

struct FrameAxisParams {
  double z_crit = 1.96;
  std::size_t bootstrap = 1000;
  std::size_t min_sample = 10;
  std::size_t max_sample = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Null sample size used for a document with `in_vocab_tokens` tokens.
std::size_t null_sample_size(std::size_t in_vocab_tokens, const FrameAxisParams& params) noexcept;

struct FrameAxisScore {
  FoundationArray bias{};
  FoundationArray z{};
  std::array<bool, kFoundationCount> significant{};
  std::size_t in_vocab_tokens = 0;
};

/// Scores one document against prebuilt frames and nulls (one null per frame,
/// matched by foundation). z = (bias - mean) / stdev, 0 when stdev is 0;
/// labels are the foundations with |z| >= z_crit, {none} if there are none,
/// {unknown} if every token is out of vocabulary. Prediction scores hold z.
std::pair<FrameAxisScore, Prediction> frameaxis_score(std::span<const std::string> tokens,
                                                      const EmbeddingStore& store,
                                                      std::span<const MicroFrame> frames,
                                                      std::span<const NullModel> nulls, double z_crit,
                                                      std::string doc_id = {});

/// Corpus-level scorer: owns the frames and background, and builds nulls on
/// demand per (foundation, sample size). Safe for concurrent score() calls.
class FrameAxisScorer {
 public:
  FrameAxisScorer(const EmbeddingStore& store, std::vector<MicroFrame> frames,
                  std::vector<std::string> background, FrameAxisParams params, std::string name = "frameaxis");

  std::pair<FrameAxisScore, Prediction> score(std::span<const std::string> tokens, std::string doc_id = {}) const;

  const std::vector<MicroFrame>& frames() const noexcept { return frames_; }
  const FrameAxisParams& params() const noexcept { return params_; }

  /// Nulls for `sample_size`, built once and cached.
  std::vector<NullModel> nulls_for(std::size_t sample_size) const;

 private:
  const EmbeddingStore* store_;
  std::vector<MicroFrame> frames_;
  std::vector<std::string> background_;
  FrameAxisParams params_;
  std::string name_;
  mutable std::mutex mutex_;
  mutable std::map<std::size_t, std::vector<NullModel>> cache_;
};

/// TSV term<TAB>score with score in [0, 1].
std::unordered_map<std::string, double> load_sentiment_scores(const std::string& path);

/// Polarity from a sentiment score: virtue iff score >= threshold. Terms
/// without a score get no polarity and are left out of both poles.
Lexicon assign_polarity(const Lexicon& lexicon, const std::unordered_map<std::string, double>& scores,
                        double threshold = 0.5);

}  // namespace mfm
