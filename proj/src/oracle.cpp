#include "sae/oracle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "sae/errors.hpp"

namespace sae {

double hard_chi_square(const SimilarityMatrix& s, const DistributionSpec& spec, MaskView test_mask) {
  const std::vector<double> all = similarities_to_training_set(test_mask, s, AggregationSpec::max());
  std::vector<double> r;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (test_mask[i]) r.push_back(all[i]);
  return chi_square(hard_bin_counts(r, spec.bins), spec.expected);
}

OracleResult exhaustive_best_split(const SimilarityMatrix& s, const DistributionSpec& spec, std::size_t n_test) {
  const std::size_t n = s.size();
  if (n > kOracleMaxSamples)
    throw DomainError("exhaustive oracle refuses N = " + std::to_string(n) + " (cap is " +
                      std::to_string(kOracleMaxSamples) + ")");
  if (n_test < 1 || n_test >= n) throw DomainError("oracle test size must lie in [1, N)");
  if (spec.expected.size() != spec.bins.size()) throw DimensionError("expected counts do not match the bin count");

  std::vector<double> dense(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dense[i * n + j] = s.at(i, j);

  // Lexicographic enumeration of index combinations; strict improvement keeps the earliest winner.
  std::vector<std::size_t> comb(n_test);
  std::iota(comb.begin(), comb.end(), std::size_t{0});
  std::vector<std::uint8_t> in_test(n);
  std::vector<double> counts(spec.bins.size());
  OracleResult best;
  best.chi2 = std::numeric_limits<double>::infinity();
  while (true) {
    std::fill(in_test.begin(), in_test.end(), 0);
    for (std::size_t i : comb) in_test[i] = 1;
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t i : comb) {
      double r = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (!in_test[j]) r = std::max(r, dense[i * n + j]);
      counts[spec.bins.bin_of(r)] += 1.0;
    }
    const double chi2 = chi_square(counts, spec.expected);
    ++best.subsets;
    if (chi2 < best.chi2) {
      best.chi2 = chi2;
      best.test = comb;
    }
    // Advance to the next combination.
    std::size_t p = n_test;
    while (p > 0 && comb[p - 1] == n - n_test + p - 1) --p;
    if (p == 0) break;
    ++comb[p - 1];
    for (std::size_t q = p; q < n_test; ++q) comb[q] = comb[q - 1] + 1;
  }
  return best;
}

}  // namespace sae
