#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sae/fingerprint.hpp"

namespace sae {

// Per-sample flags; nonzero means set. std::vector<bool> is avoided so masks can be viewed as spans.
using Mask = std::vector<std::uint8_t>;
using MaskView = std::span<const std::uint8_t>;

struct SimilarityTriple {
  std::size_t i;
  std::size_t j;
  double value;
};

// Symmetric N x N similarity matrix with zero diagonal.
//
// Dense storage keeps every row in full. Sparse storage keeps, per row, only
// the entries >= tau (in column order); everything else reads as 0.
class SimilarityMatrix {
 public:
  // One row. Dense rows have empty `cols` and `values.size() == n`; sparse
  // rows list column indices alongside their values.
  struct Row {
    std::span<const std::uint32_t> cols;
    std::span<const double> values;

    std::size_t size() const { return values.size(); }
    std::size_t col(std::size_t k) const { return cols.empty() ? k : cols[k]; }
  };

  SimilarityMatrix() = default;

  static SimilarityMatrix dense(std::size_t n);
  // Builds from upper-triangle triples (i < j). With tau set, entries below tau
  // are dropped and the result is sparse. Values must lie in [0, 1].
  static SimilarityMatrix from_triples(std::size_t n, std::span<const SimilarityTriple> triples,
                                       std::optional<double> tau = std::nullopt);

  std::size_t size() const { return n_; }
  bool is_sparse() const { return tau_.has_value(); }
  std::optional<double> tau() const { return tau_; }

  double at(std::size_t i, std::size_t j) const;
  Row row(std::size_t i) const;

  // Dense only: sets s_ij = s_ji = value.
  void set(std::size_t i, std::size_t j, double value);

  // Nonzero upper-triangle entries in row-major order.
  std::vector<SimilarityTriple> triples() const;
  std::size_t nonzero_pairs() const;
  // Fraction of off-diagonal pairs with a nonzero stored value.
  double density() const;

  SimilarityMatrix to_dense() const;
  SimilarityMatrix thresholded(double tau) const;

 private:
  friend SimilarityMatrix build_similarity_matrix(const FingerprintSet&, Measure, std::optional<double>);

  std::size_t n_ = 0;
  std::optional<double> tau_;
  std::vector<double> values_;           // dense: n*n; sparse: CSR values
  std::vector<std::uint32_t> cols_;      // sparse only
  std::vector<std::size_t> row_offsets_;  // sparse only, n+1 entries
};

// Pairwise similarity of every fingerprint pair, parallel over rows.
SimilarityMatrix build_similarity_matrix(const FingerprintSet& fps, Measure measure,
                                         std::optional<double> sparse_threshold = std::nullopt);

// How a test sample's similarities to the training set collapse to one value.
// kMax behaves exactly as kTopK with k = 1.
struct AggregationSpec {
  enum class Kind { kMax, kTopK };
  Kind kind = Kind::kMax;
  std::size_t k = 1;

  static AggregationSpec max() { return {Kind::kMax, 1}; }
  static AggregationSpec top_k(std::size_t k);
  // "max" or "topk:<k>".
  static AggregationSpec parse(const std::string& text);
  std::size_t effective_k() const { return kind == Kind::kMax ? 1 : k; }
};

// Mean of the k largest s_ij over training members j != i. Ties among equal
// similarities are taken in ascending index order. Throws DomainError when
// the training set is empty or smaller than k.
double similarity_to_training_set(std::size_t i, MaskView train_mask, const SimilarityMatrix& s,
                                  const AggregationSpec& agg);

// Hard similarity-to-training-set of every sample flagged in `test_mask`;
// the training set is the complement. Entries for training samples are 0.
std::vector<double> similarities_to_training_set(MaskView test_mask, const SimilarityMatrix& s,
                                                 const AggregationSpec& agg);

}  // namespace sae
