#include "sae/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sae/errors.hpp"

namespace sae {

double mae(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size()) throw DimensionError("truth and prediction lengths differ");
  if (truth.empty()) throw DomainError("MAE of an empty set");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) sum += std::abs(truth[i] - pred[i]);
  return sum / static_cast<double>(truth.size());
}

double r2(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size()) throw DimensionError("truth and prediction lengths differ");
  if (truth.size() < 2) throw DomainError("R^2 needs at least 2 samples");
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot == 0.0) throw UndefinedR2Error("R^2 undefined for constant truth values");
  return 1.0 - ss_res / ss_tot;
}

namespace {

void fill_metrics(BinRow& row, const std::vector<double>& truth, const std::vector<double>& pred) {
  if (truth.empty()) return;
  row.mae = mae(truth, pred);
  if (truth.size() >= 2) row.r2 = r2(truth, pred);
}

}  // namespace

BinReport bin_report(const Split& split, const SimilarityMatrix& s, const AggregationSpec& agg, const BinSpec& bins,
                     const ReportInputs& inputs) {
  const std::size_t n = s.size();
  for (std::size_t i : split.test)
    if (i >= n) throw DimensionError("test index out of range");
  if (split.test.size() + split.train.size() != n) throw ConsistencyError("split does not cover every sample");

  BinReport report;
  const Mask test_mask = split.test_mask(n);
  Mask train_mask(n);
  for (std::size_t i = 0; i < n; ++i) train_mask[i] = test_mask[i] ? 0 : 1;

  std::vector<std::size_t> bin_of;
  for (std::size_t i : split.test) {
    const double r = similarity_to_training_set(i, train_mask, s, agg);
    report.r.push_back(r);
    bin_of.push_back(bins.bin_of(r));
  }

  const std::size_t total = split.test.size();
  report.bins.resize(bins.size());
  for (std::size_t k = 0; k < bins.size(); ++k) {
    report.bins[k].lo = bins.lower(k);
    report.bins[k].hi = bins.upper(k);
  }
  for (std::size_t b : bin_of) ++report.bins[b].count;
  for (auto& row : report.bins)
    row.ratio = total ? static_cast<double>(row.count) / static_cast<double>(total) : 0.0;
  report.overall.lo = 0.0;
  report.overall.hi = 1.0;
  report.overall.count = total;
  report.overall.ratio = total ? 1.0 : 0.0;

  if (inputs.allowed) {
    if (inputs.allowed->size() != bins.size()) throw DimensionError("allowed mask does not match the bin count");
    std::size_t inside = 0;
    for (std::size_t b : bin_of)
      if ((*inputs.allowed)[b]) ++inside;
    report.adherence = total ? static_cast<double>(inside) / static_cast<double>(total) : 1.0;
  }

  if (inputs.predictions) {
    if (!inputs.ids || inputs.ids->size() != n) throw ConsistencyError("predictions need one sample id per row");
    std::vector<std::vector<double>> truth(bins.size()), pred(bins.size());
    std::vector<double> all_truth, all_pred;
    std::vector<std::string> missing;
    for (std::size_t p = 0; p < split.test.size(); ++p) {
      const std::string& id = (*inputs.ids)[split.test[p]];
      auto it = inputs.predictions->find(id);
      if (it == inputs.predictions->end()) {
        missing.push_back(id);
        continue;
      }
      truth[bin_of[p]].push_back(it->second.truth);
      pred[bin_of[p]].push_back(it->second.predicted);
      all_truth.push_back(it->second.truth);
      all_pred.push_back(it->second.predicted);
    }
    if (!missing.empty()) {
      std::string msg = "no prediction for test samples:";
      for (const auto& id : missing) msg += " " + id;
      throw ConsistencyError(msg);
    }
    for (std::size_t k = 0; k < bins.size(); ++k) fill_metrics(report.bins[k], truth[k], pred[k]);
    fill_metrics(report.overall, all_truth, all_pred);
  }
  return report;
}

namespace {

std::string metric(const std::optional<double>& v) { return v ? fmt::format("{:.4f}", *v) : "-"; }
std::string csv_metric(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : ""; }

std::string interval(const BinRow& row, bool first) {
  return fmt::format("{}{:.4g}, {:.4g}]", first ? "[" : "(", row.lo, row.hi);
}

}  // namespace

std::string format_report_table(const BinReport& report) {
  std::string out = fmt::format("{:<18} {:>14} {:>10} {:>10}\n", "bin", "count (ratio)", "MAE", "R2");
  for (std::size_t k = 0; k < report.bins.size(); ++k) {
    const auto& row = report.bins[k];
    out += fmt::format("{:<18} {:>14} {:>10} {:>10}\n", interval(row, k == 0),
                       fmt::format("{} ({:.3f})", row.count, row.ratio), metric(row.mae), metric(row.r2));
  }
  const auto& all = report.overall;
  out += fmt::format("{:<18} {:>14} {:>10} {:>10}\n", "overall", fmt::format("{} ({:.3f})", all.count, all.ratio),
                     metric(all.mae), metric(all.r2));
  if (report.adherence) out += fmt::format("adherence: {:.4f}\n", *report.adherence);
  return out;
}

std::string format_report_csv(const BinReport& report) {
  std::string out = "bin_lo,bin_hi,count,ratio,mae,r2\n";
  auto line = [&](const BinRow& row) {
    out += fmt::format("{:.17g},{:.17g},{},{:.17g},{},{}\n", row.lo, row.hi, row.count, row.ratio, csv_metric(row.mae),
                       csv_metric(row.r2));
  };
  for (const auto& row : report.bins) line(row);
  line(report.overall);
  return out;
}

}  // namespace sae
