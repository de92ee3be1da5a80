#pragma once

// Reference computations written directly from the definitions, with no
// shared code paths with the library beyond its value types.

#include <array>
#include <string>
#include <vector>

#include "mfm/foundation.hpp"

namespace oracle {

struct ClassRow {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct Metrics {
  std::array<ClassRow, mfm::kFoundationCount> rows{};
  double accuracy = 0.0;
  double coverage = 0.0;
  double fw = 0.0;
  double fm = 0.0;
  std::size_t n_scope = 0;
};

// Per-class one-vs-rest counting by scanning every document for every class.
Metrics brute_force(const std::vector<mfm::Label>& gold, const std::vector<mfm::LabelSet>& predicted,
                    bool covered_only);

struct ToyEntry {
  std::string term;  // without '*'
  bool wildcard = false;
  mfm::Label foundation = mfm::Label::care;
  mfm::FoundationArray probability{};
};

struct ToyScore {
  mfm::FoundationArray totals{};
  mfm::LabelSet labels;
};

// For each token: an exact entry if one exists, else the wildcard entry
// with the longest stem that prefixes the token. Counts or sums per token.
ToyScore lexicon_score(const std::vector<std::string>& tokens, const std::vector<ToyEntry>& entries,
                       bool probability);

// P(X <= k) for X ~ Binomial(n, p), by summing the pmf in log space.
double binomial_cdf(int k, int n, double p);

// Smallest lo and largest hi with P(X < lo) <= a/2 and P(X > hi) <= a/2.
std::pair<int, int> binomial_interval(int n, double p, double alpha);

}  // namespace oracle
