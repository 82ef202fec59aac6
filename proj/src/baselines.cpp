#include "sae/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "sae/distribution.hpp"
#include "sae/errors.hpp"
#include "sae/rng.hpp"

namespace sae {

namespace {

Split from_test_mask(const Mask& is_test) {
  Split split;
  for (std::size_t i = 0; i < is_test.size(); ++i) (is_test[i] ? split.test : split.train).push_back(i);
  return split;
}

}  // namespace

Split random_split(std::size_t n, double alpha, std::uint64_t seed) {
  const std::size_t n_test = test_size(n, alpha);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  Mask is_test(n, 0);
  for (std::size_t p = 0; p < n_test; ++p) is_test[order[p]] = 1;
  return from_test_mask(is_test);
}

std::vector<double> row_statistic(const SimilarityMatrix& s, StratifyBy mode) {
  const std::size_t n = s.size();
  std::vector<double> stat(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = s.row(i);
    double best = 0.0, sum = 0.0;
    for (std::size_t p = 0; p < row.size(); ++p) {
      if (row.col(p) == i) continue;
      best = std::max(best, row.values[p]);
      sum += row.values[p];
    }
    stat[i] = mode == StratifyBy::kMax ? best : sum / static_cast<double>(n - 1);
  }
  return stat;
}

Split stratified_split(const SimilarityMatrix& s, double alpha, std::size_t k, StratifyBy mode, std::uint64_t seed) {
  const std::size_t n = s.size();
  if (k < 2) throw DomainError("stratified split needs K >= 2");
  if (n < k) throw DomainError("stratified split needs N >= K");
  const std::size_t n_test = test_size(n, alpha);
  const std::vector<double> stat = row_statistic(s, mode);
  const auto [lo_it, hi_it] = std::minmax_element(stat.begin(), stat.end());
  const double lo = *lo_it, width = (*hi_it - *lo_it) / static_cast<double>(k);

  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t b = 0;
    if (width > 0.0) b = std::min(k - 1, static_cast<std::size_t>((stat[i] - lo) / width));
    members[b].push_back(i);
  }
  std::vector<double> sizes(k);
  for (std::size_t b = 0; b < k; ++b) sizes[b] = static_cast<double>(members[b].size());
  const std::vector<double> quota = largest_remainder(sizes, n_test);

  Rng rng(seed);
  Mask is_test(n, 0);
  for (std::size_t b = 0; b < k; ++b) {
    if (members[b].empty()) continue;
    rng.shuffle(std::span<std::size_t>(members[b]));
    for (std::size_t p = 0; p < static_cast<std::size_t>(quota[b]); ++p) is_test[members[b][p]] = 1;
  }
  return from_test_mask(is_test);
}

BaselineResult dissimilar_split(const SimilarityMatrix& s, double alpha, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw DomainError("dissimilar threshold must lie in (0, 1)");
  const std::size_t n = s.size();
  if (n < 2) throw DomainError("dissimilar split needs N >= 2");
  const std::size_t n_test = test_size(n, alpha);
  const std::vector<double> row_max = row_statistic(s, StratifyBy::kMax);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row_max[a] > row_max[b]; });

  Mask is_test(n, 0);
  std::size_t taken = 0;
  for (std::size_t i : order) {
    if (taken == n_test) break;
    const auto row = s.row(i);
    bool ok = true;
    for (std::size_t p = 0; p < row.size() && ok; ++p) {
      const std::size_t j = row.col(p);
      if (j != i && !is_test[j] && row.values[p] >= threshold) ok = false;
    }
    if (ok) {
      is_test[i] = 1;
      ++taken;
    }
  }
  return {from_test_mask(is_test), n_test - taken};
}

}  // namespace sae
