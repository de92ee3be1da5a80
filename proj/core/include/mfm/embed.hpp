#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mfm/lexicon.hpp"
#include "mfm/prediction.hpp"
#include "mfm/segment.hpp"

namespace mfm {

/// Token -> dense vector table with a fixed dimension. Rows are stored as
/// float; all arithmetic on them is done in double.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dimension);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return tokens_.size(); }

  /// Throws ValidationError on a duplicate token or wrong dimension.
  void add(std::string token, std::span<const float> values);

  std::optional<std::size_t> index(std::string_view token) const;
  bool contains(std::string_view token) const { return index(token).has_value(); }

  const std::string& token(std::size_t row) const { return tokens_[row]; }
  std::span<const float> vector(std::size_t row) const {
    return {data_.data() + row * dimension_, dimension_};
  }
  /// Euclidean norm of a row.
  double norm(std::size_t row) const { return norms_[row]; }

 private:
  std::size_t dimension_;
  std::vector<std::string> tokens_;
  std::vector<float> data_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// word2vec text format: header "<count> <dim>", then "token v1 ... vdim"
/// per line. Arity, count and duplicate errors carry line numbers.
EmbeddingStore load_vectors(const std::string& path);
void save_vectors(const EmbeddingStore& store, const std::string& path);

using DenseVector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double dot(std::span<const float> a, std::span<const double> b) noexcept;
double norm(std::span<const double> v) noexcept;
/// 0 when either side has zero norm.
double cosine(std::span<const double> a, std::span<const double> b) noexcept;

/// Mean of the in-vocabulary rows for `tokens`; nullopt when none are in vocabulary.
std::optional<DenseVector> mean_vector(std::span<const std::string> tokens, const EmbeddingStore& store);

/// Per-foundation centroids of a count lexicon's in-vocabulary terms
/// ("pseudo-documents"). Wildcard entries are looked up by their stem.
class SemanticAnchors {
 public:
  /// Throws ValidationError naming the first foundation without an in-vocabulary term.
  SemanticAnchors(const Lexicon& lexicon, const EmbeddingStore& store);

  const DenseVector& anchor(Label foundation) const { return anchors_[index_of(foundation)]; }

  /// Labels = foundations with maximal cosine(doc, anchor); scores = the five
  /// cosines. All tokens out of vocabulary gives {unknown}.
  Prediction score(std::span<const std::string> tokens, std::string doc_id = {}) const;

 private:
  const EmbeddingStore* store_;
  std::string name_;
  std::array<DenseVector, kFoundationCount> anchors_;
};

/// One-shot form: builds the anchors and scores a single document.
Prediction semantic_similarity_score(const TokenSequence& tokens, const Lexicon& lexicon,
                                     const EmbeddingStore& store, std::string doc_id = {});

}  // namespace mfm
