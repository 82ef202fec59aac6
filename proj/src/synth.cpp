#include "sae/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sae/errors.hpp"
#include "sae/rng.hpp"

namespace sae {

std::string SynthConfig::describe() const {
  return fmt::format(
      "n={} clusters={} seed={} n_bits={} on_bits={} quiet=[{}, {}] noisy=[{}, {}] noisy_fraction={}", n, clusters,
      seed, n_bits, on_bits, quiet_lo, quiet_hi, noisy_lo, noisy_hi, noisy_fraction);
}

FingerprintSet synthesize(const SynthConfig& cfg, std::vector<std::size_t>* clusters) {
  if (cfg.n < 2) throw DomainError("synthetic set needs at least 2 samples");
  if (cfg.clusters < 1) throw DomainError("synthetic set needs at least 1 cluster");
  if (cfg.on_bits == 0 || cfg.on_bits * 2 > cfg.n_bits) throw DomainError("on_bits must lie in (0, n_bits / 2]");
  Rng rng(cfg.seed);

  std::vector<std::vector<std::size_t>> templates(cfg.clusters);
  for (auto& t : templates) {
    std::vector<std::uint8_t> used(cfg.n_bits, 0);
    while (t.size() < cfg.on_bits) {
      const auto b = static_cast<std::size_t>(rng.below(cfg.n_bits));
      if (!used[b]) {
        used[b] = 1;
        t.push_back(b);
      }
    }
    std::sort(t.begin(), t.end());
  }

  std::vector<double> cumulative(cfg.clusters);
  double total = 0.0;
  for (auto& c : cumulative) {
    total += -std::log(1.0 - rng.uniform());
    c = total;
  }

  FingerprintSet fps(cfg.n_bits);
  if (clusters) clusters->clear();
  const int width = static_cast<int>(std::to_string(cfg.n - 1).size());
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double u = rng.uniform() * total;
    const auto c = std::min(cfg.clusters - 1, static_cast<std::size_t>(std::upper_bound(cumulative.begin(),
                                                                                          cumulative.end(), u) -
                                                                         cumulative.begin()));
    const double q = rng.bernoulli(cfg.noisy_fraction) ? rng.uniform(cfg.noisy_lo, cfg.noisy_hi)
                                                       : rng.uniform(cfg.quiet_lo, cfg.quiet_hi);
    if (clusters) clusters->push_back(c);
    BitVector bits(cfg.n_bits);
    std::size_t dropped = 0;
    for (std::size_t b : templates[c]) {
      if (rng.bernoulli(q))
        ++dropped;
      else
        bits.set(b);
    }
    for (std::size_t d = 0; d < dropped; ++d) bits.set(static_cast<std::size_t>(rng.below(cfg.n_bits)));
    fps.add(fmt::format("S{:0{}}", i, width), bits);
  }
  return fps;
}

}  // namespace sae
