#include "sae/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "sae/errors.hpp"
#include "sae/parallel.hpp"

namespace sae {

namespace {

void check_value(double v, std::size_t i, std::size_t j) {
  if (!(v >= 0.0 && v <= 1.0))
    throw DomainError("similarity (" + std::to_string(i) + ", " + std::to_string(j) + ") = " + std::to_string(v) +
                      " outside [0, 1]");
}

}  // namespace

SimilarityMatrix SimilarityMatrix::dense(std::size_t n) {
  SimilarityMatrix m;
  m.n_ = n;
  m.values_.assign(n * n, 0.0);
  return m;
}

SimilarityMatrix SimilarityMatrix::from_triples(std::size_t n, std::span<const SimilarityTriple> triples,
                                                std::optional<double> tau) {
  for (const auto& t : triples) {
    if (t.i >= t.j || t.j >= n)
      throw DomainError("triple (" + std::to_string(t.i) + ", " + std::to_string(t.j) + ") is not i < j < n");
    check_value(t.value, t.i, t.j);
  }
  if (!tau) {
    SimilarityMatrix m = dense(n);
    for (const auto& t : triples) m.set(t.i, t.j, t.value);
    return m;
  }
  if (!(*tau > 0.0 && *tau <= 1.0)) throw DomainError("sparse threshold must lie in (0, 1]");

  SimilarityMatrix m;
  m.n_ = n;
  m.tau_ = tau;
  std::vector<std::size_t> counts(n, 0);
  for (const auto& t : triples)
    if (t.value >= *tau) {
      ++counts[t.i];
      ++counts[t.j];
    }
  m.row_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) m.row_offsets_[i + 1] = m.row_offsets_[i] + counts[i];
  m.cols_.resize(m.row_offsets_[n]);
  m.values_.resize(m.row_offsets_[n]);
  std::vector<std::size_t> fill(m.row_offsets_.begin(), m.row_offsets_.end() - 1);
  for (const auto& t : triples) {
    if (t.value < *tau) continue;
    m.cols_[fill[t.i]] = static_cast<std::uint32_t>(t.j);
    m.values_[fill[t.i]++] = t.value;
    m.cols_[fill[t.j]] = static_cast<std::uint32_t>(t.i);
    m.values_[fill[t.j]++] = t.value;
  }
  // Sort each row by column; reject duplicate pairs.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = m.row_offsets_[i], e = m.row_offsets_[i + 1];
    std::vector<std::pair<std::uint32_t, double>> row;
    row.reserve(e - b);
    for (std::size_t k = b; k < e; ++k) row.emplace_back(m.cols_[k], m.values_[k]);
    std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0 && row[k].first == row[k - 1].first)
        throw DomainError("duplicate similarity pair (" + std::to_string(i) + ", " + std::to_string(row[k].first) +
                          ")");
      m.cols_[b + k] = row[k].first;
      m.values_[b + k] = row[k].second;
    }
  }
  return m;
}

double SimilarityMatrix::at(std::size_t i, std::size_t j) const {
  if (!is_sparse()) return values_[i * n_ + j];
  const auto b = cols_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  const auto e = cols_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  auto it = std::lower_bound(b, e, static_cast<std::uint32_t>(j));
  if (it == e || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

SimilarityMatrix::Row SimilarityMatrix::row(std::size_t i) const {
  if (!is_sparse()) return {{}, std::span<const double>(values_).subspan(i * n_, n_)};
  const std::size_t b = row_offsets_[i], len = row_offsets_[i + 1] - b;
  return {std::span<const std::uint32_t>(cols_).subspan(b, len), std::span<const double>(values_).subspan(b, len)};
}

void SimilarityMatrix::set(std::size_t i, std::size_t j, double value) {
  if (is_sparse()) throw DomainError("set() on a sparse similarity matrix");
  if (i >= n_ || j >= n_) throw DimensionError("similarity index out of range");
  if (i == j) {
    if (value != 0.0) throw DomainError("diagonal similarities are fixed at 0");
    return;
  }
  check_value(value, i, j);
  values_[i * n_ + j] = value;
  values_[j * n_ + i] = value;
}

std::vector<SimilarityTriple> SimilarityMatrix::triples() const {
  std::vector<SimilarityTriple> out;
  for (std::size_t i = 0; i < n_; ++i) {
    const Row r = row(i);
    for (std::size_t k = 0; k < r.size(); ++k) {
      const std::size_t j = r.col(k);
      if (j > i && r.values[k] != 0.0) out.push_back({i, j, r.values[k]});
    }
  }
  return out;
}

std::size_t SimilarityMatrix::nonzero_pairs() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    const Row r = row(i);
    for (std::size_t k = 0; k < r.size(); ++k)
      if (r.col(k) > i && r.values[k] != 0.0) ++count;
  }
  return count;
}

double SimilarityMatrix::density() const {
  if (n_ < 2) return 0.0;
  return static_cast<double>(nonzero_pairs()) / (static_cast<double>(n_) * static_cast<double>(n_ - 1) / 2.0);
}

SimilarityMatrix SimilarityMatrix::to_dense() const {
  if (!is_sparse()) return *this;
  auto t = triples();
  return from_triples(n_, t);
}

SimilarityMatrix SimilarityMatrix::thresholded(double tau) const {
  auto t = triples();
  return from_triples(n_, t, tau);
}

SimilarityMatrix build_similarity_matrix(const FingerprintSet& fps, Measure measure,
                                         std::optional<double> sparse_threshold) {
  const std::size_t n = fps.size();
  if (n < 2) throw DomainError("similarity matrix needs at least 2 samples");
  if (sparse_threshold && !(*sparse_threshold > 0.0 && *sparse_threshold <= 1.0))
    throw DomainError("sparse threshold must lie in (0, 1]");
  const long rows = static_cast<long>(n);

  if (!sparse_threshold) {
    SimilarityMatrix m = SimilarityMatrix::dense(n);
    // Row i owns cells (i, j) and (j, i) for j > i, so writes never overlap.
#pragma omp parallel for schedule(dynamic, 8) num_threads(num_threads())
    for (long ii = 0; ii < rows; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const auto a = fps.row(i);
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = similarity(measure, a, fps.row(j));
        m.values_[i * n + j] = v;
        m.values_[j * n + i] = v;
      }
    }
    return m;
  }

  std::vector<std::vector<SimilarityTriple>> per_row(n);
#pragma omp parallel for schedule(dynamic, 8) num_threads(num_threads())
  for (long ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto a = fps.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = similarity(measure, a, fps.row(j));
      if (v >= *sparse_threshold) per_row[i].push_back({i, j, v});
    }
  }
  std::vector<SimilarityTriple> kept;
  for (auto& r : per_row) kept.insert(kept.end(), r.begin(), r.end());
  return SimilarityMatrix::from_triples(n, kept, sparse_threshold);
}

AggregationSpec AggregationSpec::top_k(std::size_t k) {
  if (k < 1) throw DomainError("top-k aggregation needs k >= 1");
  return {Kind::kTopK, k};
}

AggregationSpec AggregationSpec::parse(const std::string& text) {
  if (text == "max") return max();
  if (text.rfind("topk:", 0) == 0) {
    try {
      std::size_t used = 0;
      const long k = std::stol(text.substr(5), &used);
      if (used == text.size() - 5 && k >= 1) return top_k(static_cast<std::size_t>(k));
    } catch (const std::logic_error&) {
    }
  }
  throw UsageError("aggregation must be 'max' or 'topk:<k>', got '" + text + "'");
}

double similarity_to_training_set(std::size_t i, MaskView train_mask, const SimilarityMatrix& s,
                                  const AggregationSpec& agg) {
  if (train_mask.size() != s.size()) throw DimensionError("training mask length differs from matrix size");
  if (i >= s.size()) throw DimensionError("sample index out of range");
  const std::size_t k = agg.effective_k();
  std::size_t train = 0;
  for (std::size_t j = 0; j < train_mask.size(); ++j)
    if (train_mask[j] && j != i) ++train;
  if (train == 0) throw DomainError("empty training set");
  if (k > train)
    throw DomainError("top-" + std::to_string(k) + " aggregation over " + std::to_string(train) + " training samples");

  // Stored training similarities; unstored members contribute zeros.
  const auto row = s.row(i);
  std::vector<double> vals;
  for (std::size_t p = 0; p < row.size(); ++p) {
    const std::size_t j = row.col(p);
    if (j != i && train_mask[j]) vals.push_back(row.values[p]);
  }
  if (k == 1) return vals.empty() ? 0.0 : *std::max_element(vals.begin(), vals.end());
  const std::size_t take = std::min(k, vals.size());
  std::partial_sort(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(take), vals.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t p = 0; p < take; ++p) sum += vals[p];
  return sum / static_cast<double>(k);
}

std::vector<double> similarities_to_training_set(MaskView test_mask, const SimilarityMatrix& s,
                                                 const AggregationSpec& agg) {
  if (test_mask.size() != s.size()) throw DimensionError("test mask length differs from matrix size");
  Mask train_mask(test_mask.size());
  for (std::size_t j = 0; j < test_mask.size(); ++j) train_mask[j] = test_mask[j] ? 0 : 1;
  std::vector<double> r(s.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (test_mask[i]) r[i] = similarity_to_training_set(i, train_mask, s, agg);
  return r;
}

}  // namespace sae
