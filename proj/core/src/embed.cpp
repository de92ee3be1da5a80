#include "mfm/embed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mfm/error.hpp"
#include "text_util.hpp"

namespace mfm {

EmbeddingStore::EmbeddingStore(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw ValidationError("embedding dimension must be positive");
}

void EmbeddingStore::add(std::string token, std::span<const float> values) {
  if (values.size() != dimension_) {
    throw ValidationError("vector for " + token + " has " + std::to_string(values.size()) +
                          " components, expected " + std::to_string(dimension_));
  }
  if (!index_.emplace(token, tokens_.size()).second) throw ValidationError("duplicate token " + token);
  tokens_.push_back(std::move(token));
  data_.insert(data_.end(), values.begin(), values.end());
  double sq = 0.0;
  for (float v : values) sq += static_cast<double>(v) * static_cast<double>(v);
  norms_.push_back(std::sqrt(sq));
}

std::optional<std::size_t> EmbeddingStore::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingStore load_vectors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, 1, "missing header");
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  std::vector<std::string_view> header;
  for (auto f : detail::split(detail::trim(line), ' ')) {
    if (!f.empty()) header.push_back(f);
  }
  auto count = header.size() == 2 ? detail::parse_number<std::size_t>(header[0]) : std::nullopt;
  auto dim = header.size() == 2 ? detail::parse_number<std::size_t>(header[1]) : std::nullopt;
  if (!count || !dim || *dim == 0) throw ParseError(path, 1, "header must be \"<count> <dim>\"");

  EmbeddingStore store(*dim);
  std::vector<float> values(*dim);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view rest = line;
    while (!rest.empty() && rest.back() == ' ') rest.remove_suffix(1);
    if (rest.empty()) continue;
    auto space = rest.find(' ');
    if (space == std::string_view::npos || space == 0) {
      throw ParseError(path, lineno, "expected a token followed by " + std::to_string(*dim) + " values");
    }
    std::string token(rest.substr(0, space));
    rest.remove_prefix(space + 1);
    std::size_t n = 0;
    while (!rest.empty()) {
      auto next = rest.find(' ');
      auto field = rest.substr(0, next);
      rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next + 1);
      if (field.empty()) continue;
      if (n == *dim) {
        throw ParseError(path, lineno, "row for \"" + token + "\" has more than " + std::to_string(*dim) + " values");
      }
      auto v = detail::parse_number<float>(field);
      if (!v) throw ParseError(path, lineno, "not a number: \"" + std::string(field) + "\"");
      values[n++] = *v;
    }
    if (n != *dim) {
      throw ParseError(path, lineno,
                       "row for \"" + token + "\" has " + std::to_string(n) + " values, expected " + std::to_string(*dim));
    }
    if (store.size() == *count) throw ParseError(path, lineno, "more rows than the declared count " + std::to_string(*count));
    try {
      store.add(std::move(token), values);
    } catch (const ValidationError& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  if (store.size() != *count) {
    throw ParseError(path, lineno, "declared " + std::to_string(*count) + " rows, found " + std::to_string(store.size()));
  }
  return store;
}

void save_vectors(const EmbeddingStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << store.size() << ' ' << store.dimension() << '\n';
  for (std::size_t r = 0; r < store.size(); ++r) {
    out << store.token(r);
    for (float v : store.vector(r)) out << ' ' << detail::format_number(v);
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path);
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dot(std::span<const float> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

double norm(std::span<const double> v) noexcept { return std::sqrt(dot(v, v)); }

double cosine(std::span<const double> a, std::span<const double> b) noexcept {
  double na = norm(a);
  double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

std::optional<DenseVector> mean_vector(std::span<const std::string> tokens, const EmbeddingStore& store) {
  DenseVector sum(store.dimension(), 0.0);
  std::size_t n = 0;
  for (const auto& t : tokens) {
    auto row = store.index(t);
    if (!row) continue;
    auto v = store.vector(*row);
    for (std::size_t i = 0; i < v.size(); ++i) sum[i] += v[i];
    ++n;
  }
  if (n == 0) return std::nullopt;
  for (auto& x : sum) x /= static_cast<double>(n);
  return sum;
}

SemanticAnchors::SemanticAnchors(const Lexicon& lexicon, const EmbeddingStore& store)
    : store_(&store), name_(lexicon.name()) {
  if (lexicon.kind() != LexiconKind::count) throw ValidationError("semantic anchors need a count lexicon");
  std::array<std::vector<std::string>, kFoundationCount> terms;
  for (const auto& e : lexicon.entries()) terms[index_of(e.count().foundation)].push_back(e.term);
  for (Label f : kFoundations) {
    auto centroid = mean_vector(terms[index_of(f)], store);
    if (!centroid) {
      throw ValidationError("lexicon " + lexicon.name() + " has no in-vocabulary term for " +
                            std::string(to_string(f)));
    }
    anchors_[index_of(f)] = std::move(*centroid);
  }
}

Prediction SemanticAnchors::score(std::span<const std::string> tokens, std::string doc_id) const {
  const std::string approach = "semantic_sim:" + name_;
  auto doc = mean_vector(tokens, *store_);
  if (!doc) return make_unknown(std::move(doc_id), approach);
  Prediction p;
  p.doc_id = std::move(doc_id);
  p.approach = approach;
  double best = -2.0;
  FoundationArray cos{};
  for (std::size_t f = 0; f < kFoundationCount; ++f) {
    cos[f] = cosine(*doc, anchors_[f]);
    p.scores[kFoundations[f]] = cos[f];
    best = std::max(best, cos[f]);
  }
  for (std::size_t f = 0; f < kFoundationCount; ++f) {
    if (cos[f] == best) p.labels.insert(kFoundations[f]);
  }
  return p;
}

Prediction semantic_similarity_score(const TokenSequence& tokens, const Lexicon& lexicon,
                                     const EmbeddingStore& store, std::string doc_id) {
  return SemanticAnchors(lexicon, store).score(tokens.tokens, std::move(doc_id));
}

}  // namespace mfm
