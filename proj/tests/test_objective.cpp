#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "reference.hpp"
#include "sae/errors.hpp"
#include "sae/objective.hpp"
#include "sae/rng.hpp"

using namespace sae;
using namespace sae::testing;

namespace {

SimilarityMatrix random_matrix(Rng& rng, std::size_t n, double density = 1.0) {
  auto s = SimilarityMatrix::dense(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(density)) s.set(i, j, rng.uniform());
  return s;
}

std::vector<double> random_weights(Rng& rng, std::size_t n) {
  std::vector<double> w(n);
  for (auto& x : w) x = rng.uniform(0.02, 0.98);
  return w;
}

ObjectiveConfig config_for(const BinSpec& bins, std::vector<double> expected, double lambda = 0.0) {
  ObjectiveConfig cfg;
  cfg.bins = bins;
  cfg.expected = std::move(expected);
  cfg.lambda = lambda;
  return cfg;
}

}  // namespace

TEST_CASE("smooth similarity examples") {
  SUBCASE("all weights one") {
    Rng rng(1);
    const auto s = random_matrix(rng, 9);
    const std::vector<double> w(9, 1.0);
    for (double r : smooth_similarity(w, s, 100.0)) CHECK(r == doctest::Approx(std::log(9.0) / 100.0).epsilon(1e-14));
  }
  SUBCASE("two partners") {
    auto s = SimilarityMatrix::dense(3);
    s.set(0, 1, 0.5);
    s.set(0, 2, 0.6);
    const std::vector<double> w(3, 0.0);
    const auto r = smooth_similarity(w, s, 100.0);
    CHECK(std::abs(r[0] - 0.6) < 5e-4);
  }
  SUBCASE("no overflow at full similarity") {
    auto s = SimilarityMatrix::dense(2);
    s.set(0, 1, 1.0);
    const std::vector<double> w(2, 0.0);
    const auto r = smooth_similarity(w, s, 1000.0);
    CHECK(std::isfinite(r[0]));
    CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("smooth similarity lies within the log-sum-exp bounds") {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.below(40);
    const auto s = random_matrix(rng, n, rng.uniform(0.2, 1.0));
    const auto w = random_weights(rng, n);
    const auto r = smooth_similarity(w, s, 100.0);
    for (std::size_t i = 0; i < n; ++i) {
      double top = 0.0;
      for (std::size_t j = 0; j < n; ++j) top = std::max(top, (1.0 - w[j]) * s.at(i, j));
      CHECK(r[i] >= top);
      CHECK(r[i] <= top + std::log(static_cast<double>(n)) / 100.0);
    }
  }
}

TEST_CASE("raising a weight never raises anyone's smooth similarity") {
  Rng rng(3);
  const auto s = random_matrix(rng, 25);
  auto w = random_weights(rng, 25);
  const auto before = smooth_similarity(w, s, 100.0);
  for (std::size_t j = 0; j < 25; j += 4) {
    auto bumped = w;
    bumped[j] = std::min(1.0, bumped[j] + 0.2);
    const auto after = smooth_similarity(bumped, s, 100.0);
    for (std::size_t i = 0; i < 25; ++i) CHECK(after[i] <= before[i]);
  }
}

TEST_CASE("soft memberships") {
  const BinSpec thirds = BinSpec::thirds();
  Rng rng(4);
  std::vector<double> m(3);
  for (int t = 0; t < 10000; ++t) {
    soft_memberships(rng.uniform(), thirds, m);
    const double sum = m[0] + m[1] + m[2];
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    for (double x : m) CHECK(x >= 0.0);
  }
  const BinSpec sharp({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}, 0.01);
  soft_memberships(0.5, sharp, m);
  CHECK(m[1] >= 0.999);

  // Equal widths put the crossover exactly on the boundary.
  soft_memberships(1.0 / 3.0, thirds, m);
  CHECK(m[0] == doctest::Approx(m[1]).epsilon(1e-9));
}

TEST_CASE("soft bin counts") {
  Rng rng(5);
  std::vector<double> r(50);
  for (auto& x : r) x = rng.uniform();
  const std::vector<double> ones(50, 1.0), zeros(50, 0.0);
  const auto full = soft_bin_counts(ones, r, BinSpec::thirds());
  CHECK(std::accumulate(full.begin(), full.end(), 0.0) == doctest::Approx(50.0).epsilon(1e-12));
  for (double o : soft_bin_counts(zeros, r, BinSpec::thirds())) CHECK(o == 0.0);
}

TEST_CASE("entropy regularizer") {
  const std::vector<double> half{0.5};
  CHECK(entropy_regularizer(half, 2.0) == doctest::Approx(2.0 * std::log(2.0)));
  const std::vector<double> corners{0, 1, 1, 0, 1};
  CHECK(entropy_regularizer(corners, 1.0) <= 5 * 1e-5);
  CHECK(entropy_regularizer(corners, 1.0) >= 0.0);
  // Concave in each coordinate: the midpoint lies above the chord.
  for (double a = 0.05; a < 0.95; a += 0.1) {
    const double b = a + 0.04, mid = 0.5 * (a + b);
    const std::vector<double> va{a}, vb{b}, vm{mid};
    CHECK(entropy_regularizer(vm, 1.0) >= 0.5 * (entropy_regularizer(va, 1.0) + entropy_regularizer(vb, 1.0)));
  }
}

TEST_CASE("loss value matches the reference implementation") {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_matrix(rng, 15);
    const auto w = random_weights(rng, 15);
    const auto cfg = config_for(BinSpec::thirds(), {2, 2, 1}, 0.3);
    ReferenceProblem p{dense_rows(s), {0, 1.0 / 3.0, 2.0 / 3.0, 1.0}, 0.1, {2, 2, 1}, 100.0, 0.3};
    CHECK(evaluate(w, s, cfg).loss == doctest::Approx(reference_loss(p, w)).epsilon(1e-10));
  }
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20;
    const auto s = random_matrix(rng, n);
    const auto w = random_weights(rng, n);
    const double lambda = trial % 2 ? 0.5 : 0.0;
    const auto cfg = config_for(BinSpec::thirds(), {3, 4, 3}, lambda);
    ReferenceProblem p{dense_rows(s), {0, 1.0 / 3.0, 2.0 / 3.0, 1.0}, 0.1, {3, 4, 3}, 100.0, lambda};
    const auto ev = evaluate(w, s, cfg);
    const auto fd = reference_gradient(p, w, 1e-5);
    for (std::size_t j = 0; j < n; ++j)
      worst = std::max(worst, std::abs(ev.grad[j] - fd[j]) / std::max({std::abs(fd[j]), std::abs(ev.grad[j]), 1.0}));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("entropy gradient in closed form") {
  Rng rng(8);
  const auto s = random_matrix(rng, 12);
  const auto w = random_weights(rng, 12);
  const auto plain = evaluate(w, s, config_for(BinSpec::thirds(), {2, 2, 2}, 0.0));
  const auto reg = evaluate(w, s, config_for(BinSpec::thirds(), {2, 2, 2}, 0.7));
  for (std::size_t i = 0; i < 12; ++i)
    CHECK(reg.grad[i] - plain.grad[i] == doctest::Approx(0.7 * std::log((1.0 - w[i]) / w[i])).epsilon(1e-9));
}

TEST_CASE("negative gradient is a descent direction") {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_matrix(rng, 20);
    auto w = random_weights(rng, 20);
    const auto cfg = config_for(BinSpec::thirds(), {3, 3, 4}, 0.1);
    const auto ev = evaluate(w, s, cfg);
    double norm2 = 0.0;
    for (double g : ev.grad) norm2 += g * g;
    const double step = 1e-6 / std::max(1.0, std::sqrt(norm2));
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= step * ev.grad[j];
    CHECK(evaluate(w, s, cfg).loss < ev.loss);
    CHECK(ev.loss >= 0.0);
  }
}

TEST_CASE("balanced bipartite assignment has near-zero loss") {
  // Six test samples, two per bin, each with one training partner at its bin center.
  const BinSpec bins = BinSpec::thirds();
  auto s = SimilarityMatrix::dense(12);
  std::vector<double> w(12, 0.0);
  for (std::size_t t = 0; t < 6; ++t) {
    s.set(t, 6 + t, bins.centers()[t / 2]);
    w[t] = 1.0;
  }
  const auto ev = evaluate(w, s, config_for(bins, {2, 2, 2}));
  CHECK(ev.loss < 1e-3);
}

TEST_CASE("sparse storage evaluates like its dense expansion") {
  Rng rng(10);
  const auto full = random_matrix(rng, 30);
  const auto sparse = full.thresholded(0.6);
  const auto dense = sparse.to_dense();
  const auto w = random_weights(rng, 30);
  const auto cfg = config_for(BinSpec::thirds(), {3, 3, 3}, 0.2);
  const auto a = evaluate(w, sparse, cfg);
  const auto b = evaluate(w, dense, cfg);
  CHECK(std::abs(a.loss - b.loss) <= 1e-9 * std::max(1.0, std::abs(b.loss)));
  for (std::size_t j = 0; j < 30; ++j) CHECK(std::abs(a.grad[j] - b.grad[j]) <= 1e-9 * std::max(1.0, std::abs(b.grad[j])));
}

TEST_CASE("configuration is validated") {
  auto s = SimilarityMatrix::dense(4);
  const std::vector<double> w(4, 0.5);
  auto cfg = config_for(BinSpec::thirds(), {1, 1});
  CHECK_THROWS_AS(evaluate(w, s, cfg), DimensionError);
  cfg = config_for(BinSpec::thirds(), {1, 1, 0}, -1.0);
  CHECK_THROWS(evaluate(w, s, cfg));
  cfg = config_for(BinSpec::thirds(), {1, 1, 0});
  const std::vector<double> short_w(3, 0.5);
  CHECK_THROWS_AS(evaluate(short_w, s, cfg), DimensionError);
}
