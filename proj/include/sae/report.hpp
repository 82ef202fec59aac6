#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sae/distribution.hpp"
#include "sae/similarity.hpp"
#include "sae/solver.hpp"

namespace sae {

double mae(std::span<const double> truth, std::span<const double> pred);
// 1 - SS_res / SS_tot; negative when predictions are worse than the mean.
// Throws UndefinedR2Error on constant truth.
double r2(std::span<const double> truth, std::span<const double> pred);

struct Prediction {
  double truth;
  double predicted;
};

using PredictionSet = std::unordered_map<std::string, Prediction>;

struct BinRow {
  double lo = 0.0, hi = 0.0;
  std::size_t count = 0;
  double ratio = 0.0;
  std::optional<double> mae;
  std::optional<double> r2;
};

struct BinReport {
  std::vector<BinRow> bins;
  BinRow overall;
  // Fraction of test samples in allowed bins; set when an allowed mask is given.
  std::optional<double> adherence;
  std::vector<double> r;  // similarity to training set, per test sample in split order
};

struct ReportInputs {
  const std::vector<std::string>* ids = nullptr;        // required with predictions
  const PredictionSet* predictions = nullptr;
  const std::vector<std::uint8_t>* allowed = nullptr;  // per-bin
};

// Similarity of each test sample to the training set, its bin, and per-bin
// counts. With predictions, per-bin MAE (count >= 1) and R^2 (count >= 2),
// each bin's R^2 centred on that bin's own mean; the overall row pools every
// test sample.
BinReport bin_report(const Split& split, const SimilarityMatrix& s, const AggregationSpec& agg, const BinSpec& bins,
                     const ReportInputs& inputs = {});

std::string format_report_table(const BinReport& report);
// Header bin_lo,bin_hi,count,ratio,mae,r2; absent metrics are empty fields.
// The overall row uses bin_lo=0, bin_hi=1 and is written last.
std::string format_report_csv(const BinReport& report);

}  // namespace sae
