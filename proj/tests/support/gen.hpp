#pragma once

// Seeded generators for property tests.

#include <string>
#include <vector>

#include "mfm/corpus.hpp"
#include "mfm/embed.hpp"
#include "mfm/foundation.hpp"
#include "mfm/lexicon.hpp"
#include "mfm/prediction.hpp"
#include "mfm/random.hpp"
#include "oracle.hpp"

namespace gen {

mfm::Label foundation(mfm::Rng& rng);

// Any valid prediction label set: 1..5 foundations, or {none}, or {unknown}.
mfm::LabelSet label_set(mfm::Rng& rng);

// n documents "d0000".. with uniformly drawn foundation gold labels.
mfm::Dataset bench(mfm::Rng& rng, std::size_t n, const std::string& name = "synthetic");

// Dataset with exactly counts[f] documents of each foundation, ids prefixed.
mfm::Dataset balanced(const std::array<std::size_t, mfm::kFoundationCount>& counts, const std::string& prefix,
                      std::uint64_t shuffle_seed = 0);

std::vector<mfm::Prediction> predictions(mfm::Rng& rng, const mfm::Dataset& bench);

// Lowercase ASCII word of 1..max_len letters from a small alphabet so that
// prefixes collide often.
std::string word(mfm::Rng& rng, std::size_t max_len = 5);

struct ToyLexicon {
  std::vector<oracle::ToyEntry> entries;
  mfm::Lexicon count{"toy", mfm::LexiconKind::count};
  mfm::Lexicon probability{"toy", mfm::LexiconKind::probability};
};

// Distinct terms, some wildcards, dyadic probabilities (k/8) so sums are exact.
ToyLexicon toy_lexicon(mfm::Rng& rng, std::size_t n_entries);

// Tokens drawn from the lexicon terms (possibly extended) and random words.
std::vector<std::string> tokens(mfm::Rng& rng, const ToyLexicon& lex, std::size_t n);

// Store of `n` tokens "w0".. with standard normal components.
mfm::EmbeddingStore gaussian_store(mfm::Rng& rng, std::size_t n, std::size_t dim);

}  // namespace gen
