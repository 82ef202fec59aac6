#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sae/fingerprint.hpp"

namespace sae {

// Clustered binary fingerprints. Each cluster has a random template of
// `on_bits` set bits; a member drops each template bit with its own noise
// rate q and replaces every dropped bit with a random one, so two members
// with rates q1, q2 share about (1-q1)(1-q2) of their bits. Cluster sizes
// are multinomial with exponentially distributed cluster weights, which
// yields a mix of singletons, small and large clusters.
struct SynthConfig {
  std::size_t n = 300;
  std::size_t clusters = 60;
  std::uint64_t seed = 0;
  std::size_t n_bits = 2048;
  std::size_t on_bits = 96;
  // A fraction `noisy_fraction` of samples draws q from [noisy_lo, noisy_hi],
  // the rest from [quiet_lo, quiet_hi].
  double quiet_lo = 0.0, quiet_hi = 0.08;
  double noisy_lo = 0.2, noisy_hi = 0.4;
  double noisy_fraction = 0.2;

  std::string describe() const;
};

// `clusters`, when given, receives each sample's cluster index.
FingerprintSet synthesize(const SynthConfig& cfg, std::vector<std::size_t>* clusters = nullptr);

}  // namespace sae
