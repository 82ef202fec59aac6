#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sae/distribution.hpp"
#include "sae/fingerprint.hpp"
#include "sae/report.hpp"
#include "sae/similarity.hpp"
#include "sae/solver.hpp"

namespace sae {

// Reals are written with 17 significant digits so text files round-trip exactly.
std::string format_real(double v);

// Fingerprint file: "n_bits <n>", then "<id>\t<hex>" lines. The hex string
// has ceil(n_bits / 4) digits; bit 0 is the most significant bit of the
// first digit and unused trailing bits must be zero.
FingerprintSet read_fingerprints(std::istream& in, const std::string& source = "<fingerprints>");
void write_fingerprints(std::ostream& out, const FingerprintSet& fps);
std::string hex_encode(BitView bits);

// Similarity matrix file: "n <n> [tau <t>]", then "<i> <j> <value>" lines
// with i < j. Dense matrices list every pair. With a tau header the matrix
// is sparse and missing pairs are 0.
SimilarityMatrix read_matrix(std::istream& in, const std::string& source = "<matrix>");
void write_matrix(std::ostream& out, const SimilarityMatrix& s);

// key=value distribution spec. A relative `external=` path is resolved
// against `base_dir` and its values are loaded.
DistributionRequest read_distribution_request(std::istream& in, const std::filesystem::path& base_dir = {},
                                              const std::string& source = "<spec>");
// One similarity value per line; blank lines and '#' comments are skipped.
std::vector<double> read_similarity_values(std::istream& in, const std::string& source = "<values>");

struct SplitFile {
  double alpha = 0.0;
  double loss = 0.0;
  double gap = 0.0;
  std::vector<std::string> ids;
  Mask is_test;
  std::vector<double> weights;

  Split split() const;
};

// "# sae-split v1 alpha=<a> loss=<l> gap=<g>", then "<id>\t<train|test>\t<w>"
// per sample in input order, weights with 6 decimals.
void write_split(std::ostream& out, const SplitFile& split);
SplitFile read_split(std::istream& in, const std::string& source = "<split>");
SplitFile make_split_file(const std::vector<std::string>& ids, const Split& split, std::span<const double> weights,
                          double alpha, double loss, double gap);

// "<id>\t<truth>\t<prediction>" per line.
PredictionSet read_predictions(std::istream& in, const std::string& source = "<predictions>");

std::vector<std::string> index_ids(std::size_t n);

}  // namespace sae
