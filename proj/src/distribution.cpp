#include "sae/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sae/errors.hpp"

namespace sae {

BinSpec::BinSpec(std::vector<double> boundaries, double sigma_scale) : boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 3) throw SpecError("need at least 2 bins");
  if (boundaries_.front() != 0.0 || boundaries_.back() != 1.0) throw SpecError("bin boundaries must span [0, 1]");
  for (std::size_t k = 1; k < boundaries_.size(); ++k)
    if (!(boundaries_[k] > boundaries_[k - 1])) throw SpecError("bin boundaries must be strictly increasing");
  if (!(sigma_scale > 0.0)) throw SpecError("sigma scale must be positive");
  for (std::size_t k = 1; k < boundaries_.size(); ++k) {
    centers_.push_back(0.5 * (boundaries_[k - 1] + boundaries_[k]));
    sigmas_.push_back(sigma_scale * (boundaries_[k] - boundaries_[k - 1]));
  }
}

BinSpec BinSpec::with_fixed_sigma(std::vector<double> boundaries, double sigma) {
  if (!(sigma > 0.0)) throw SpecError("sigma must be positive");
  BinSpec b(std::move(boundaries));
  std::fill(b.sigmas_.begin(), b.sigmas_.end(), sigma);
  return b;
}

BinSpec BinSpec::uniform(std::size_t k) {
  if (k < 2) throw SpecError("need at least 2 bins");
  std::vector<double> b(k + 1);
  for (std::size_t i = 0; i <= k; ++i) b[i] = static_cast<double>(i) / static_cast<double>(k);
  return BinSpec(std::move(b));
}

std::size_t BinSpec::bin_of(double r) const {
  // First k with r <= b_{k+1}; r <= b_1 (including 0 and negatives) is bin 0.
  auto it = std::lower_bound(boundaries_.begin() + 1, boundaries_.end(), r);
  if (it == boundaries_.end()) return size() - 1;
  return static_cast<std::size_t>(it - boundaries_.begin()) - 1;
}

std::optional<std::size_t> BinSpec::boundary_index(double value) const {
  for (std::size_t k = 0; k < boundaries_.size(); ++k)
    if (std::abs(boundaries_[k] - value) <= 1e-12) return k;
  return std::nullopt;
}

std::string distribution_kind_name(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::kBalanced: return "balanced";
    case DistributionKind::kMimic: return "mimic";
    case DistributionKind::kBounded: return "bounded";
    case DistributionKind::kCustom: return "custom";
  }
  return "?";
}

std::size_t test_size(std::size_t n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw SpecError("alpha must lie in (0, 1)");
  return static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n)));
}

std::size_t DistributionSpec::test_size() const { return sae::test_size(n, alpha); }

std::vector<double> largest_remainder(std::span<const double> shares, std::size_t total) {
  const double sum = std::accumulate(shares.begin(), shares.end(), 0.0);
  if (shares.empty() || !(sum > 0.0)) throw DomainError("apportionment needs a positive total share");
  std::vector<double> out(shares.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < shares.size(); ++k) {
    if (shares[k] < 0.0) throw DomainError("negative share");
    const double exact = static_cast<double>(total) * shares[k] / sum;
    const double whole = std::floor(exact);
    out[k] = whole;
    assigned += static_cast<std::size_t>(whole);
    remainders.emplace_back(exact - whole, k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t p = 0; assigned < total; ++p, ++assigned) out[remainders[p % remainders.size()].second] += 1.0;
  return out;
}

namespace {

DistributionSpec make_spec(DistributionKind kind, const BinSpec& bins, std::size_t n, double alpha,
                           std::span<const double> shares) {
  DistributionSpec spec;
  spec.kind = kind;
  spec.bins = bins;
  spec.alpha = alpha;
  spec.n = n;
  const std::size_t n_test = test_size(n, alpha);
  if (n_test < 1) throw InfeasibleError("alpha * N rounds to an empty test set");
  if (n_test >= n) throw InfeasibleError("alpha * N leaves no training samples");
  spec.expected = largest_remainder(shares, n_test);
  spec.allowed.assign(bins.size(), 1);
  return spec;
}

}  // namespace

DistributionSpec balanced_spec(std::size_t n, double alpha, const BinSpec& bins) {
  const std::size_t n_test = test_size(n, alpha);
  if (n_test < bins.size())
    throw InfeasibleError("balanced split needs alpha * N >= K (" + std::to_string(n_test) + " < " +
                          std::to_string(bins.size()) + ")");
  std::vector<double> shares(bins.size(), 1.0);
  return make_spec(DistributionKind::kBalanced, bins, n, alpha, shares);
}

DistributionSpec mimic_spec(std::span<const double> external_r, const BinSpec& bins, std::size_t n, double alpha) {
  if (external_r.empty()) throw DomainError("mimic spec needs at least one external similarity value");
  for (double r : external_r)
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("external similarity " + std::to_string(r) + " outside [0, 1]");
  const BinCounts hist = hard_bin_counts(external_r, bins);
  return make_spec(DistributionKind::kMimic, bins, n, alpha, hist);
}

DistributionSpec bounded_spec(double min_sim, double max_sim, std::size_t n, double alpha, const BinSpec& bins) {
  if (!(min_sim >= 0.0 && min_sim < max_sim && max_sim <= 1.0))
    throw SpecError("bounded spec needs 0 <= min_sim < max_sim <= 1");
  const auto lo = bins.boundary_index(min_sim);
  const auto hi = bins.boundary_index(max_sim);
  if (!lo || !hi) throw SpecError("bounded spec limits must be bin boundaries");
  // Bins lo .. hi-1 lie inside [min_sim, max_sim]; mass is spread evenly over them.
  std::vector<double> shares(bins.size(), 0.0);
  for (std::size_t k = *lo; k < *hi; ++k) shares[k] = 1.0;
  DistributionSpec spec = make_spec(DistributionKind::kBounded, bins, n, alpha, shares);
  for (std::size_t k = 0; k < bins.size(); ++k) spec.allowed[k] = shares[k] > 0.0 ? 1 : 0;
  return spec;
}

DistributionSpec custom_spec(std::span<const double> weights, const BinSpec& bins, std::size_t n, double alpha) {
  if (weights.size() != bins.size())
    throw SpecError("custom spec lists " + std::to_string(weights.size()) + " expected values for " +
                    std::to_string(bins.size()) + " bins");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw SpecError("expected counts must be finite and non-negative");
  if (std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0)
    throw SpecError("custom spec needs at least one positive expected count");
  return make_spec(DistributionKind::kCustom, bins, n, alpha, weights);
}

BinCounts hard_bin_counts(std::span<const double> r, const BinSpec& bins) {
  BinCounts counts(bins.size(), 0.0);
  for (double v : r) counts[bins.bin_of(v)] += 1.0;
  return counts;
}

double chi_square(std::span<const double> observed, std::span<const double> expected, double floor) {
  if (observed.size() != expected.size())
    throw DimensionError("chi-square over " + std::to_string(observed.size()) + " observed and " +
                         std::to_string(expected.size()) + " expected bins");
  double chi2 = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double d = observed[k] - expected[k];
    chi2 += d * d / std::max(expected[k], floor);
  }
  return chi2;
}

double adherence(std::span<const double> r, const DistributionSpec& spec) {
  if (r.empty()) return 1.0;
  std::size_t inside = 0;
  for (double v : r)
    if (spec.allowed[spec.bins.bin_of(v)]) ++inside;
  return static_cast<double>(inside) / static_cast<double>(r.size());
}

DistributionSpec DistributionRequest::materialize(std::size_t n) const {
  const BinSpec bins(boundaries);
  switch (kind) {
    case DistributionKind::kBalanced: return balanced_spec(n, alpha, bins);
    case DistributionKind::kMimic: return mimic_spec(external, bins, n, alpha);
    case DistributionKind::kBounded: return bounded_spec(min_sim, max_sim, n, alpha, bins);
    case DistributionKind::kCustom: return custom_spec(expected, bins, n, alpha);
  }
  throw SpecError("unknown distribution kind");
}

}  // namespace sae
