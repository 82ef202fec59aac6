#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "sae/similarity.hpp"
#include "sae/solver.hpp"

namespace sae {

enum class StratifyBy { kMax, kMean };

struct BaselineResult {
  Split split;
  // Test samples short of round(alpha N); only the dissimilar split can fall short.
  std::size_t shortfall = 0;
};

// Uniform seeded shuffle; the first round(alpha N) positions become the test set.
Split random_split(std::size_t n, double alpha, std::uint64_t seed);

// Row statistic (max or mean over j != i) bucketed into K equal-width bins
// spanning its observed range; each bin contributes its largest-remainder
// share of round(alpha N), drawn at random. Bins are visited in order and
// empty ones draw nothing, so a single occupied bin reproduces random_split.
Split stratified_split(const SimilarityMatrix& s, double alpha, std::size_t k, StratifyBy mode, std::uint64_t seed);

// Per-sample statistic used by stratified_split.
std::vector<double> row_statistic(const SimilarityMatrix& s, StratifyBy mode);

// Greedy: visit samples by descending row max (ties by index) and move one
// to the test set when its max similarity to every sample still in training
// is below `threshold`. Stops at round(alpha N) test members; any shortfall
// is reported, never papered over by relaxing the threshold.
BaselineResult dissimilar_split(const SimilarityMatrix& s, double alpha, double threshold = 0.5);

}  // namespace sae
