#pragma once

#include <cstddef>
#include <vector>

#include "sae/distribution.hpp"
#include "sae/similarity.hpp"

namespace sae {

inline constexpr std::size_t kOracleMaxSamples = 20;

struct OracleResult {
  std::vector<std::size_t> test;  // ascending
  double chi2 = 0.0;
  std::size_t subsets = 0;  // number of subsets enumerated
};

// Exact minimum of the discrete objective over every test subset of size
// n_test: true max similarity to the training set, hard bins, floored chi2.
// Ties keep the lexicographically smallest index set. Refuses N > 20.
OracleResult exhaustive_best_split(const SimilarityMatrix& s, const DistributionSpec& spec, std::size_t n_test);

// Discrete objective for one split, the quantity the oracle minimises.
double hard_chi_square(const SimilarityMatrix& s, const DistributionSpec& spec, MaskView test_mask);

}  // namespace sae
