#include "sae/objective.hpp"

#include <algorithm>
#include <cmath>

#include "sae/errors.hpp"
#include "sae/parallel.hpp"

namespace sae {

void ObjectiveConfig::validate(std::size_t n) const {
  (void)n;
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be non-negative");
  if (!(eps_log > 0.0 && eps_log <= 1e-6)) throw DomainError("eps_log must lie in (0, 1e-6]");
  if (expected.size() != bins.size()) throw DimensionError("expected counts do not match the bin count");
}

namespace {

// Terms below exp(-40) relative to the largest (which is 1) vanish in a double sum of N <= 1e6 terms.
constexpr double kNegligible = 40.0;

struct RowNorm {
  double top;      // max_j (1 - w_j) s_ij
  double log_sum;  // log sum_j exp(beta ((1 - w_j) s_ij - top))
  double r(double beta) const { return top + log_sum / beta; }
  double scaled(double beta) const { return beta * top + log_sum; }
};

// Smooth max of one row, with the max shift. Unstored entries are zeros.
// Keeping the max apart makes top <= r <= top + log(N) / beta hold in floating point.
RowNorm row_log_norm(const SimilarityMatrix::Row& row, std::size_t n, std::span<const double> w, double beta) {
  const std::size_t implicit = n - row.size();
  double top = implicit > 0 ? 0.0 : -INFINITY;
  for (std::size_t p = 0; p < row.size(); ++p) top = std::max(top, (1.0 - w[row.col(p)]) * row.values[p]);
  const double m = beta * top;
  double sum = m < kNegligible ? static_cast<double>(implicit) * std::exp(-m) : 0.0;
  for (std::size_t p = 0; p < row.size(); ++p) {
    const double x = beta * ((1.0 - w[row.col(p)]) * row.values[p]) - m;
    if (x > -kNegligible) sum += std::exp(x);
  }
  return {top, std::log(sum)};
}

// Memberships and their derivative in r for one sample.
void memberships_with_slope(double r, const BinSpec& bins, double* m, double* dm) {
  const std::size_t k = bins.size();
  const auto& c = bins.centers();
  const auto& sg = bins.sigmas();
  double zmax = -INFINITY;
  for (std::size_t q = 0; q < k; ++q) {
    const double d = r - c[q];
    m[q] = -d * d / (2.0 * sg[q] * sg[q]);
    zmax = std::max(zmax, m[q]);
  }
  double sum = 0.0;
  for (std::size_t q = 0; q < k; ++q) {
    m[q] = std::exp(m[q] - zmax);
    sum += m[q];
  }
  double mean_slope = 0.0;
  for (std::size_t q = 0; q < k; ++q) {
    m[q] /= sum;
    if (dm) {
      dm[q] = -(r - c[q]) / (sg[q] * sg[q]);
      mean_slope += m[q] * dm[q];
    }
  }
  if (dm)
    for (std::size_t q = 0; q < k; ++q) dm[q] = m[q] * (dm[q] - mean_slope);
}

double clamp_log(double w, double eps) { return std::clamp(w, eps, 1.0 - eps); }

}  // namespace

std::vector<double> smooth_similarity(std::span<const double> w, const SimilarityMatrix& s, double beta) {
  if (w.size() != s.size()) throw DimensionError("weight vector length differs from matrix size");
  const std::size_t n = s.size();
  std::vector<double> r(n);
  const long rows = static_cast<long>(n);
#pragma omp parallel for schedule(static) num_threads(num_threads())
  for (long i = 0; i < rows; ++i)
    r[static_cast<std::size_t>(i)] = row_log_norm(s.row(static_cast<std::size_t>(i)), n, w, beta).r(beta);
  return r;
}

void soft_memberships(double r, const BinSpec& bins, std::span<double> out) {
  if (out.size() != bins.size()) throw DimensionError("membership buffer does not match the bin count");
  memberships_with_slope(r, bins, out.data(), nullptr);
}

BinCounts soft_bin_counts(std::span<const double> w, std::span<const double> r, const BinSpec& bins) {
  if (w.size() != r.size()) throw DimensionError("weights and similarities differ in length");
  BinCounts o(bins.size(), 0.0);
  std::vector<double> m(bins.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    memberships_with_slope(r[i], bins, m.data(), nullptr);
    for (std::size_t q = 0; q < m.size(); ++q) o[q] += w[i] * m[q];
  }
  return o;
}

double entropy_regularizer(std::span<const double> w, double lambda, double eps_log) {
  double h = 0.0;
  for (double x : w) {
    const double v = clamp_log(x, eps_log);
    h -= v * std::log(v) + (1.0 - v) * std::log(1.0 - v);
  }
  return lambda * h;
}

Objective::Objective(const SimilarityMatrix& s, ObjectiveConfig cfg)
    : s_(s), cfg_(std::move(cfg)), n_(s.size()), k_(cfg_.bins.size()) {
  cfg_.validate(n_);
  r_.resize(n_);
  log_norm_.resize(n_);
  member_.resize(n_ * k_);
  dmember_.resize(n_ * k_);
  a_.resize(n_);
  counts_.resize(k_);
}

double Objective::evaluate(std::span<const double> w, std::span<double> grad) {
  if (w.size() != n_ || grad.size() != n_) throw DimensionError("weight or gradient length differs from matrix size");
  const double beta = cfg_.beta;
  const long rows = static_cast<long>(n_);

#pragma omp parallel for schedule(static) num_threads(num_threads())
  for (long ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const RowNorm norm = row_log_norm(s_.row(i), n_, w, beta);
    log_norm_[i] = norm.scaled(beta);
    r_[i] = norm.r(beta);
    memberships_with_slope(r_[i], cfg_.bins, &member_[i * k_], &dmember_[i * k_]);
  }

  std::fill(counts_.begin(), counts_.end(), 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t q = 0; q < k_; ++q) counts_[q] += w[i] * member_[i * k_ + q];

  std::vector<double> g(k_);
  chi2_ = 0.0;
  for (std::size_t q = 0; q < k_; ++q) {
    const double denom = std::max(cfg_.expected[q], cfg_.expected_floor);
    const double d = counts_[q] - cfg_.expected[q];
    chi2_ += d * d / denom;
    g[q] = 2.0 * d / denom;
  }

  for (std::size_t i = 0; i < n_; ++i) {
    double direct = 0.0, slope = 0.0;
    for (std::size_t q = 0; q < k_; ++q) {
      direct += g[q] * member_[i * k_ + q];
      slope += g[q] * dmember_[i * k_ + q];
    }
    grad[i] = direct;
    a_[i] = w[i] * slope;
  }

  // dr_i/dw_j = -s_ij exp(beta (1 - w_j) s_ij - beta r_i); summed along row j.
#pragma omp parallel for schedule(static) num_threads(num_threads())
  for (long jj = 0; jj < rows; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const auto row = s_.row(j);
    const double damp = beta * (1.0 - w[j]);
    double acc = 0.0;
    for (std::size_t p = 0; p < row.size(); ++p) {
      const double sij = row.values[p];
      if (sij == 0.0) continue;
      const std::size_t i = row.col(p);
      if (a_[i] == 0.0) continue;
      const double x = damp * sij - log_norm_[i];
      if (x > -kNegligible) acc += a_[i] * sij * std::exp(x);
    }
    grad[j] -= acc;
  }

  reg_ = 0.0;
  if (cfg_.lambda > 0.0) {
    reg_ = entropy_regularizer(w, cfg_.lambda, cfg_.eps_log);
    // The clamp is flat outside [eps, 1 - eps], so the corners carry no entropy gradient.
    for (std::size_t i = 0; i < n_; ++i)
      if (w[i] > cfg_.eps_log && w[i] < 1.0 - cfg_.eps_log) grad[i] += cfg_.lambda * std::log((1.0 - w[i]) / w[i]);
  }
  return chi2_ + reg_;
}

Evaluation evaluate(std::span<const double> w, const SimilarityMatrix& s, const ObjectiveConfig& cfg) {
  Objective obj(s, cfg);
  Evaluation out;
  out.grad.resize(s.size());
  out.loss = obj.evaluate(w, out.grad);
  out.chi2 = obj.chi2();
  out.regularizer = obj.regularizer();
  out.r = obj.r();
  out.soft_counts = obj.soft_counts();
  return out;
}

}  // namespace sae
