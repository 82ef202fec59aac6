#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sae/distribution.hpp"
#include "sae/similarity.hpp"

namespace sae {

// Relaxed test-membership weights, one per sample, each in [0, 1].
using RelaxedWeights = std::vector<double>;

struct ObjectiveConfig {
  double beta = 100.0;  // smooth-max sharpness
  double lambda = 0.0;  // entropy weight
  BinSpec bins = BinSpec::thirds();
  std::vector<double> expected;
  double eps_log = 1e-9;
  double expected_floor = kExpectedFloor;

  void validate(std::size_t n) const;
};

// r_i = (1/beta) log sum_j exp(beta (1 - w_j) s_ij), evaluated with the max
// shift. Entries missing from a sparse row count as s_ij = 0. Note the sum
// runs over every j, so r_i >= log(N)/beta even for an isolated sample.
std::vector<double> smooth_similarity(std::span<const double> w, const SimilarityMatrix& s, double beta);

// softmax_k(-(r - c_k)^2 / (2 sigma_k^2)); writes K memberships.
void soft_memberships(double r, const BinSpec& bins, std::span<double> out);

// o_k = sum_i w_i * membership_k(r_i).
BinCounts soft_bin_counts(std::span<const double> w, std::span<const double> r, const BinSpec& bins);

// -lambda * sum_i (w log w + (1 - w) log(1 - w)), w clamped to [eps, 1 - eps].
double entropy_regularizer(std::span<const double> w, double lambda, double eps_log = 1e-9);

struct Evaluation {
  double loss = 0.0;
  double chi2 = 0.0;
  double regularizer = 0.0;
  std::vector<double> grad;
  std::vector<double> r;
  BinCounts soft_counts;
};

// Relaxed loss chi2(o, e) + l_reg and its exact gradient with respect to w.
//
// The gradient has two paths. Directly, w_j scales sample j's contribution
// to every o_k. Indirectly, w_j damps s_ij inside every r_i, which moves
// sample i's soft bin memberships:
//
//   dL/dw_j = sum_k g_k m_jk - sum_i a_i s_ij exp(beta (1 - w_j) s_ij - beta r_i)
//   g_k     = 2 (o_k - e_k) / max(e_k, floor)
//   a_i     = w_i sum_k g_k dm_ik/dr_i
//
// The second sum runs along row j by symmetry of S, so the pass is
// parallel over j with a fixed summation order per output.
class Objective {
 public:
  Objective(const SimilarityMatrix& s, ObjectiveConfig cfg);

  // Returns the loss; fills `grad` (length N).
  double evaluate(std::span<const double> w, std::span<double> grad);

  void set_lambda(double lambda) { cfg_.lambda = lambda; }
  const ObjectiveConfig& config() const { return cfg_; }

  // State from the most recent evaluate().
  double chi2() const { return chi2_; }
  double regularizer() const { return reg_; }
  const std::vector<double>& r() const { return r_; }
  const BinCounts& soft_counts() const { return counts_; }

 private:
  const SimilarityMatrix& s_;
  ObjectiveConfig cfg_;
  std::size_t n_;
  std::size_t k_;
  std::vector<double> r_;
  std::vector<double> log_norm_;  // beta * r_i
  std::vector<double> member_;    // N x K memberships
  std::vector<double> dmember_;   // N x K d membership / d r
  std::vector<double> a_;
  BinCounts counts_;
  double chi2_ = 0.0;
  double reg_ = 0.0;
};

Evaluation evaluate(std::span<const double> w, const SimilarityMatrix& s, const ObjectiveConfig& cfg);

}  // namespace sae
