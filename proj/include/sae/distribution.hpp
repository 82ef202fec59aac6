#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sae {

// K similarity bins over [0, 1]. Bin k covers (b_{k-1}, b_k]; the first bin
// is closed at 0. Each bin carries a center and a Gaussian width used by the
// soft binning in the objective.
class BinSpec {
 public:
  // Default widths: sigma_k = sigma_scale * (b_k - b_{k-1}).
  explicit BinSpec(std::vector<double> boundaries, double sigma_scale = 0.1);
  // Same sigma for every bin.
  static BinSpec with_fixed_sigma(std::vector<double> boundaries, double sigma);
  static BinSpec uniform(std::size_t k);
  static BinSpec thirds() { return uniform(3); }

  std::size_t size() const { return centers_.size(); }
  const std::vector<double>& boundaries() const { return boundaries_; }
  const std::vector<double>& centers() const { return centers_; }
  const std::vector<double>& sigmas() const { return sigmas_; }
  double lower(std::size_t k) const { return boundaries_[k]; }
  double upper(std::size_t k) const { return boundaries_[k + 1]; }

  // Index of the bin holding r. Values outside [0, 1] go to the nearest end bin.
  std::size_t bin_of(double r) const;
  // Whether `value` is one of the boundaries (within 1e-12).
  std::optional<std::size_t> boundary_index(double value) const;

 private:
  std::vector<double> boundaries_;
  std::vector<double> centers_;
  std::vector<double> sigmas_;
};

using BinCounts = std::vector<double>;

enum class DistributionKind { kBalanced, kMimic, kBounded, kCustom };

std::string distribution_kind_name(DistributionKind kind);

// Desired test-set histogram: integer expected counts e_k summing to
// round(alpha * N). `allowed` marks bins a test sample may occupy; it is all
// ones except for bounded specs.
struct DistributionSpec {
  DistributionKind kind = DistributionKind::kBalanced;
  BinSpec bins = BinSpec::thirds();
  std::vector<double> expected;
  std::vector<std::uint8_t> allowed;
  double alpha = 0.0;
  std::size_t n = 0;

  std::size_t test_size() const;
};

// round(alpha * N), with alpha checked to lie in (0, 1).
std::size_t test_size(std::size_t n, double alpha);

// Integer apportionment of `total` proportional to `shares` (largest
// remainder; ties go to the lower index).
std::vector<double> largest_remainder(std::span<const double> shares, std::size_t total);

DistributionSpec balanced_spec(std::size_t n, double alpha, const BinSpec& bins);
DistributionSpec mimic_spec(std::span<const double> external_r, const BinSpec& bins, std::size_t n, double alpha);
DistributionSpec bounded_spec(double min_sim, double max_sim, std::size_t n, double alpha, const BinSpec& bins);
// `weights` are relative; they are rescaled to round(alpha * N).
DistributionSpec custom_spec(std::span<const double> weights, const BinSpec& bins, std::size_t n, double alpha);

BinCounts hard_bin_counts(std::span<const double> r, const BinSpec& bins);

inline constexpr double kExpectedFloor = 0.5;

// Sum of (o_k - e_k)^2 / max(e_k, floor).
double chi_square(std::span<const double> observed, std::span<const double> expected,
                  double floor = kExpectedFloor);

// Fraction of the values in r that land in an allowed bin; 1 for empty r.
double adherence(std::span<const double> r, const DistributionSpec& spec);

// Everything a distribution spec file can say, before the dataset size is known.
struct DistributionRequest {
  DistributionKind kind = DistributionKind::kBalanced;
  double alpha = 0.0;
  std::vector<double> boundaries{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  std::vector<double> expected;      // custom
  std::vector<double> external;      // mimic
  std::string external_path;         // mimic, as written in the file
  double min_sim = 0.0, max_sim = 1.0;  // bounded

  DistributionSpec materialize(std::size_t n) const;
};

}  // namespace sae
