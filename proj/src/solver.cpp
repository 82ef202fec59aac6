#include "sae/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "sae/errors.hpp"
#include "sae/rng.hpp"

namespace sae {

void SolverConfig::validate() const {
  if (iterations < 1) throw UsageError("iterations must be >= 1");
  if (!(step > 0.0) || !(dual_step > 0.0)) throw UsageError("step sizes must be positive");
  if (!(penalty >= 0.0)) throw UsageError("penalty must be non-negative");
  if (lambda && !(*lambda >= 0.0)) throw UsageError("lambda must be non-negative");
  if (!(lambda_scale >= 0.0)) throw UsageError("lambda scale must be non-negative");
  if (!(lambda_ramp >= 0.0 && lambda_ramp <= 1.0)) throw UsageError("lambda ramp must lie in [0, 1]");
  if (!(tol_feas > 0.0)) throw UsageError("feasibility tolerance must be positive");
}

Mask Split::test_mask(std::size_t n) const {
  Mask m(n, 0);
  for (std::size_t i : test) m[i] = 1;
  return m;
}

RelaxedWeights init_weights(std::size_t n, double alpha, std::uint64_t seed) {
  Rng rng(seed);
  RelaxedWeights w(n);
  constexpr double kLo = 1e-6, kHi = 1.0 - 1e-6;
  for (double& x : w) x = std::clamp(rng.uniform(alpha - 0.05, alpha + 0.05), kLo, kHi);
  return w;
}

double project_capped_simplex(std::span<double> v, double target) {
  if (!(target >= 0.0 && target <= static_cast<double>(v.size()))) throw DomainError("projection target out of range");
  auto mass = [&](double t) {
    double sum = 0.0;
    for (double x : v) sum += std::clamp(x - t, 0.0, 1.0);
    return sum;
  };
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  double lo = *lo_it - 1.0, hi = *hi_it;  // mass(lo) = N, mass(hi) = 0
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  const double t = 0.5 * (lo + hi);
  for (double& x : v) x = std::clamp(x - t, 0.0, 1.0);
  return t;
}

Split round_split_count(std::span<const double> w, std::size_t n_test) {
  if (n_test > w.size()) throw DomainError("test size exceeds sample count");
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  Split split;
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

Split round_split(std::span<const double> w, double alpha) { return round_split_count(w, test_size(w.size(), alpha)); }

SplitSolution solve(const SimilarityMatrix& s, const DistributionSpec& spec, const SolverConfig& cfg,
                    const TraceCallback& on_trace) {
  cfg.validate();
  const std::size_t n = s.size();
  if (spec.n != n)
    throw SpecError("distribution spec built for " + std::to_string(spec.n) + " samples, matrix has " +
                    std::to_string(n));
  if (n < spec.bins.size()) throw InfeasibleError("fewer samples than bins");
  const std::size_t n_test = spec.test_size();
  if (n_test < 1 || n_test >= n) throw InfeasibleError("alpha * N must leave both sets non-empty");
  const double target = static_cast<double>(n_test);
  const double inv_n = 1.0 / static_cast<double>(n);

  ObjectiveConfig ocfg;
  ocfg.beta = cfg.beta;
  ocfg.bins = spec.bins;
  ocfg.expected = spec.expected;
  ocfg.eps_log = cfg.eps_log;
  Objective objective(s, ocfg);

  SplitSolution sol;
  RelaxedWeights& w = sol.weights;
  w = init_weights(n, spec.alpha, cfg.seed);
  std::vector<double> grad(n);

  double lambda_final = 0.0;
  if (cfg.lambda) {
    lambda_final = *cfg.lambda;
  } else {
    objective.set_lambda(0.0);
    objective.evaluate(w, grad);
    lambda_final = cfg.lambda_scale * objective.chi2();
  }
  const double ramp_iters = cfg.lambda_ramp * static_cast<double>(cfg.iterations);
  const long checkpoint = std::max(1L, cfg.iterations / 100);
  constexpr std::size_t kWindow = 100;

  std::vector<double> m1, m2;
  if (cfg.adaptive) {
    m1.assign(n, 0.0);
    m2.assign(n, 0.0);
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;

  double nu = 0.0;
  double gap = std::accumulate(w.begin(), w.end(), 0.0) - target;
  std::deque<double> window;
  double window_sum = 0.0;

  for (long t = 0; t < cfg.iterations; ++t) {
    const double lambda =
        ramp_iters > 0.0 ? lambda_final * std::min(1.0, static_cast<double>(t) / ramp_iters) : lambda_final;
    objective.set_lambda(lambda);
    const double loss = objective.evaluate(w, grad);
    if (!std::isfinite(loss)) throw NumericalError("non-finite loss", t);

    window.push_back(loss);
    window_sum += loss;
    if (window.size() > kWindow) {
      window_sum -= window.front();
      window.pop_front();
    }

    const bool project = cfg.constraint == SolverConfig::Constraint::kProjection;
    const double shift = project ? 0.0 : nu + cfg.penalty * gap * inv_n;
    if (cfg.adaptive) {
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t + 1));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t + 1));
      for (std::size_t j = 0; j < n; ++j) {
        const double g = grad[j] + shift;
        m1[j] = kBeta1 * m1[j] + (1.0 - kBeta1) * g;
        m2[j] = kBeta2 * m2[j] + (1.0 - kBeta2) * g * g;
        w[j] -= cfg.step * (m1[j] / c1) / (std::sqrt(m2[j] / c2) + kAdamEps);
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) w[j] -= cfg.step * (grad[j] + shift);
    }
    if (project) {
      nu = project_capped_simplex(w, target) / cfg.step;
    } else {
      for (double& x : w) x = std::clamp(x, 0.0, 1.0);
    }
    gap = std::accumulate(w.begin(), w.end(), 0.0) - target;
    if (!project) nu += cfg.dual_step * gap * inv_n;

    if ((t + 1) % checkpoint == 0 || t + 1 == cfg.iterations) {
      TracePoint tp{t + 1, window_sum / static_cast<double>(window.size()), objective.chi2(), lambda, std::abs(gap)};
      sol.trace.push_back(tp);
      if (on_trace) on_trace(tp);
    }
  }

  objective.set_lambda(lambda_final);
  sol.final_loss = objective.evaluate(w, grad);
  if (!std::isfinite(sol.final_loss)) throw NumericalError("non-finite loss", cfg.iterations);
  sol.lambda = lambda_final;
  sol.feasibility_gap = std::abs(gap);
  if (sol.feasibility_gap > cfg.tol_feas)
    throw NumericalError("sum of weights missed alpha N by " + std::to_string(sol.feasibility_gap), cfg.iterations);
  sol.split = round_split_count(w, n_test);
  return sol;
}

}  // namespace sae
