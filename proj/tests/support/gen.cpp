#include "gen.hpp"

#include <cstdio>
#include <set>

namespace gen {

using mfm::Label;

Label foundation(mfm::Rng& rng) { return mfm::kFoundations[rng.below(mfm::kFoundationCount)]; }

mfm::LabelSet label_set(mfm::Rng& rng) {
  const auto kind = rng.below(10);
  if (kind == 0) return {Label::none};
  if (kind == 1) return {Label::unknown};
  mfm::LabelSet s;
  const auto k = 1 + rng.below(kind < 7 ? 1 : 5);
  for (std::uint64_t i = 0; i < k; ++i) s.insert(foundation(rng));
  return s;
}

mfm::Dataset bench(mfm::Rng& rng, std::size_t n, const std::string& name) {
  std::vector<mfm::Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "d%04zu", i);
    mfm::Document d;
    d.id = id;
    d.text = "text " + std::to_string(i);
    d.language = "en";
    d.gold = foundation(rng);
    docs.push_back(std::move(d));
  }
  return mfm::Dataset(name, std::move(docs));
}

mfm::Dataset balanced(const std::array<std::size_t, mfm::kFoundationCount>& counts, const std::string& prefix,
                      std::uint64_t shuffle_seed) {
  std::vector<mfm::Document> docs;
  for (std::size_t f = 0; f < mfm::kFoundationCount; ++f) {
    for (std::size_t i = 0; i < counts[f]; ++i) {
      mfm::Document d;
      d.id = prefix + std::string(mfm::to_string(mfm::kFoundations[f])) + "-" + std::to_string(i);
      d.text = "document " + d.id;
      d.language = "en";
      d.gold = mfm::kFoundations[f];
      docs.push_back(std::move(d));
    }
  }
  if (shuffle_seed) {
    mfm::Rng rng(shuffle_seed);
    rng.shuffle(std::span<mfm::Document>(docs));
  }
  return mfm::Dataset(prefix.empty() ? "balanced" : prefix, std::move(docs));
}

std::vector<mfm::Prediction> predictions(mfm::Rng& rng, const mfm::Dataset& bench) {
  std::vector<mfm::Prediction> out;
  for (const auto& d : bench.documents()) {
    mfm::Prediction p;
    p.doc_id = d.id;
    p.labels = label_set(rng);
    p.approach = "random";
    out.push_back(std::move(p));
  }
  return out;
}

std::string word(mfm::Rng& rng, std::size_t max_len) {
  static constexpr char alphabet[] = "abcde";
  std::string w;
  const auto len = 1 + rng.below(max_len);
  for (std::uint64_t i = 0; i < len; ++i) w += alphabet[rng.below(5)];
  return w;
}

ToyLexicon toy_lexicon(mfm::Rng& rng, std::size_t n_entries) {
  ToyLexicon lex;
  std::set<std::string> used;
  while (lex.entries.size() < n_entries) {
    oracle::ToyEntry e;
    e.term = word(rng, 4);
    if (!used.insert(e.term).second) continue;
    e.wildcard = rng.below(3) == 0;
    e.foundation = foundation(rng);
    for (auto& p : e.probability) p = static_cast<double>(rng.below(9)) / 8.0;
    const std::string written = e.wildcard ? e.term + "*" : e.term;
    lex.count.add(written, mfm::CountEntry{e.foundation, std::nullopt});
    lex.probability.add(written, mfm::ProbabilityEntry{e.probability, {}});
    lex.entries.push_back(std::move(e));
  }
  return lex;
}

std::vector<std::string> tokens(mfm::Rng& rng, const ToyLexicon& lex, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto kind = rng.below(4);
    if (kind == 0 || lex.entries.empty()) {
      out.push_back(word(rng, 6));
    } else {
      auto t = lex.entries[rng.below(lex.entries.size())].term;
      if (kind == 1) t += word(rng, 2);
      out.push_back(std::move(t));
    }
  }
  return out;
}

mfm::EmbeddingStore gaussian_store(mfm::Rng& rng, std::size_t n, std::size_t dim) {
  mfm::EmbeddingStore store(dim);
  std::vector<float> v(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : v) x = static_cast<float>(rng.normal());
    store.add("w" + std::to_string(i), v);
  }
  return store;
}

}  // namespace gen
