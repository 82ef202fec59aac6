#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sae/distribution.hpp"
#include "sae/objective.hpp"
#include "sae/similarity.hpp"

namespace sae {

struct SolverConfig {
  long iterations = 20000;
  double step = 0.1;        // primal step on w
  double dual_step = 0.1;   // step on the multiplier of sum(w) = alpha N, per sample
  double penalty = 10.0;    // quadratic penalty on the same constraint, per sample
  std::uint64_t seed = 0;
  double beta = 100.0;
  // Entropy weight. Unset: lambda_scale times the initial relaxed chi2.
  std::optional<double> lambda;
  double lambda_scale = 0.01;
  // Fraction of iterations over which lambda ramps up linearly from 0.
  double lambda_ramp = 0.25;
  double eps_log = 1e-9;
  double tol_feas = 0.5;
  // Per-coordinate adaptive steps (Adam moments) instead of plain projected gradient.
  bool adaptive = false;
  // kDual: multiplier updated by ascent on sum(w) - alpha N (plus the penalty).
  // kProjection: multiplier solved exactly each step, i.e. Euclidean
  // projection onto {sum(w) = round(alpha N), 0 <= w <= 1}.
  enum class Constraint { kDual, kProjection };
  Constraint constraint = Constraint::kProjection;

  void validate() const;
};

struct TracePoint {
  long iteration;
  double loss;           // mean loss over the preceding window (up to 100 iterations)
  double chi2;
  double lambda;
  double feasibility_gap;
};

// A train/test partition. Index lists are ascending.
struct Split {
  std::vector<std::size_t> test;
  std::vector<std::size_t> train;

  Mask test_mask(std::size_t n) const;
};

struct SplitSolution {
  RelaxedWeights weights;
  Split split;
  double final_loss = 0.0;
  double feasibility_gap = 0.0;
  double lambda = 0.0;  // final entropy weight
  std::vector<TracePoint> trace;
};

using TraceCallback = std::function<void(const TracePoint&)>;

// Initial weights uniform in [alpha - 0.05, alpha + 0.05], clipped into (0, 1).
RelaxedWeights init_weights(std::size_t n, double alpha, std::uint64_t seed);

// The round(alpha N) largest weights form the test set; ties go to the lower index.
Split round_split(std::span<const double> w, double alpha);
Split round_split_count(std::span<const double> w, std::size_t n_test);

// Shift t such that sum_j clamp(v_j - t, 0, 1) = target; applies it in place.
// Returns t. Requires 0 <= target <= v.size().
double project_capped_simplex(std::span<double> v, double target);

// Projected primal-dual descent on the relaxed problem
//   minimize chi2(o(w), e) + l_reg(w)  s.t.  sum(w) = alpha N,  0 <= w <= 1,
// then rounding. Box constraints are enforced by clamping every iterate;
// the equality constraint by one multiplier plus a quadratic penalty.
SplitSolution solve(const SimilarityMatrix& s, const DistributionSpec& spec, const SolverConfig& cfg,
                    const TraceCallback& on_trace = {});

}  // namespace sae
