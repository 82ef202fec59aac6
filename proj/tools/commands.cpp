#include "commands.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "sae/baselines.hpp"
#include "sae/errors.hpp"
#include "sae/io.hpp"
#include "sae/oracle.hpp"
#include "sae/parallel.hpp"
#include "sae/report.hpp"
#include "sae/solver.hpp"

namespace sae::cli {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  return out;
}

SimilarityMatrix load_matrix(const std::string& path) {
  auto in = open_in(path);
  return read_matrix(in, path);
}

DistributionRequest load_request(const std::string& path) {
  auto in = open_in(path);
  return read_distribution_request(in, std::filesystem::path(path).parent_path(), path);
}

std::vector<double> parse_boundaries(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw UsageError("bad boundary list '" + text + "'");
    }
  }
  return out;
}

}  // namespace

int cmd_similarity(const SimilarityOptions& opt, std::ostream& out) {
  auto in = open_in(opt.fingerprints);
  const FingerprintSet fps = read_fingerprints(in, opt.fingerprints);
  const SimilarityMatrix s = build_similarity_matrix(fps, parse_measure(opt.measure), opt.sparse_threshold);
  auto file = open_out(opt.out);
  write_matrix(file, s);
  out << fmt::format("N={} measure={} density={:.6f}{}\n", s.size(), opt.measure, s.density(),
                     s.tau() ? fmt::format(" tau={}", *s.tau()) : "");
  return 0;
}

int cmd_split(const SplitOptions& opt, std::ostream& out) {
  const SimilarityMatrix s = load_matrix(opt.matrix);
  const std::size_t n = s.size();
  std::vector<std::string> ids = index_ids(n);
  if (!opt.ids.empty()) {
    auto in = open_in(opt.ids);
    const FingerprintSet fps = read_fingerprints(in, opt.ids);
    if (fps.size() != n)
      throw ConsistencyError(fmt::format("'{}' names {} samples, matrix has {}", opt.ids, fps.size(), n));
    ids = fps.ids();
  }
  const DistributionRequest req = load_request(opt.spec);
  const DistributionSpec spec = req.materialize(n);

  Split split;
  std::vector<double> weights;
  double loss = 0.0, gap = 0.0;
  bool solver_run = false;
  if (opt.strategy == "sae") {
    SolverConfig cfg = opt.solver;
    cfg.seed = opt.seed;
    TraceCallback trace;
    if (opt.log == LogLevel::kTrace)
      trace = [&](const TracePoint& tp) {
        out << fmt::format("iter {:>7} loss {:.6f} chi2 {:.6f} lambda {:.6g} gap {:.3g}\n", tp.iteration, tp.loss,
                           tp.chi2, tp.lambda, tp.feasibility_gap);
      };
    SplitSolution sol = solve(s, spec, cfg, trace);
    split = std::move(sol.split);
    weights = std::move(sol.weights);
    loss = sol.final_loss;
    gap = sol.feasibility_gap;
    solver_run = true;
  } else if (opt.strategy == "random") {
    split = random_split(n, spec.alpha, opt.seed);
  } else if (opt.strategy == "stratified-max" || opt.strategy == "stratified-avg") {
    split = stratified_split(s, spec.alpha, spec.bins.size(),
                             opt.strategy == "stratified-max" ? StratifyBy::kMax : StratifyBy::kMean, opt.seed);
  } else if (opt.strategy == "dissimilar") {
    if (spec.kind == DistributionKind::kMimic || spec.kind == DistributionKind::kCustom)
      throw UsageError("the dissimilar strategy takes a balanced or bounded spec, not " +
                       distribution_kind_name(spec.kind));
    double threshold = 0.5;
    if (opt.threshold)
      threshold = *opt.threshold;
    else if (spec.kind == DistributionKind::kBounded && req.max_sim < 1.0)
      threshold = req.max_sim;
    BaselineResult res = dissimilar_split(s, spec.alpha, threshold);
    if (res.shortfall > 0)
      out << fmt::format("warning: dissimilar split is {} test samples short of {}\n", res.shortfall,
                         spec.test_size());
    split = std::move(res.split);
  } else {
    throw UsageError("unknown strategy '" + opt.strategy + "'");
  }

  const BinReport rep = bin_report(split, s, AggregationSpec::max(), spec.bins, {nullptr, nullptr, &spec.allowed});
  BinCounts counts;
  for (const auto& row : rep.bins) counts.push_back(static_cast<double>(row.count));
  const double hard = chi_square(counts, spec.expected);
  if (!solver_run) loss = hard;

  auto file = open_out(opt.out);
  write_split(file, make_split_file(ids, split, weights, spec.alpha, loss, gap));

  if (opt.log != LogLevel::kQuiet) {
    std::string realized, expected;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      realized += fmt::format("{}{}", k ? "," : "", counts[k]);
      expected += fmt::format("{}{}", k ? "," : "", spec.expected[k]);
    }
    out << fmt::format("strategy={} kind={} N={} test={}\n", opt.strategy, distribution_kind_name(spec.kind), n,
                       split.test.size());
    out << fmt::format("bins realized=[{}] expected=[{}]\n", realized, expected);
    out << fmt::format("hard_chi2={:.6f} adherence={:.4f} feasibility_gap={:.6g}\n", hard, *rep.adherence, gap);
  }
  return 0;
}

int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out) {
  auto split_in = open_in(opt.split);
  const SplitFile sf = read_split(split_in, opt.split);
  const SimilarityMatrix s = load_matrix(opt.matrix);
  if (sf.ids.size() != s.size())
    throw ConsistencyError(fmt::format("split file lists {} samples, matrix has {}", sf.ids.size(), s.size()));

  ReportInputs inputs;
  inputs.ids = &sf.ids;
  PredictionSet preds;
  if (!opt.predictions.empty()) {
    auto in = open_in(opt.predictions);
    preds = read_predictions(in, opt.predictions);
    std::unordered_set<std::string> known(sf.ids.begin(), sf.ids.end());
    std::vector<std::string> unknown;
    for (const auto& [id, p] : preds)
      if (!known.contains(id)) unknown.push_back(id);
    if (!unknown.empty()) {
      std::sort(unknown.begin(), unknown.end());
      std::string msg = "predictions for unknown sample ids:";
      for (const auto& id : unknown) msg += " " + id;
      throw ConsistencyError(msg);
    }
    inputs.predictions = &preds;
  }

  std::optional<DistributionSpec> spec;
  BinSpec bins(parse_boundaries(opt.boundaries));
  if (!opt.spec.empty()) {
    spec = load_request(opt.spec).materialize(s.size());
    bins = spec->bins;
    inputs.allowed = &spec->allowed;
  }
  const BinReport rep = bin_report(sf.split(), s, AggregationSpec::parse(opt.agg), bins, inputs);
  out << format_report_table(rep);
  if (!opt.csv.empty()) {
    auto file = open_out(opt.csv);
    file << format_report_csv(rep);
  } else {
    out << '\n' << format_report_csv(rep);
  }
  return 0;
}

int cmd_oracle(const OracleOptions& opt, std::ostream& out) {
  const SimilarityMatrix s = load_matrix(opt.matrix);
  const DistributionSpec spec = load_request(opt.spec).materialize(s.size());
  const std::size_t n_test = opt.n_test.value_or(spec.test_size());
  const OracleResult res = exhaustive_best_split(s, spec, n_test);
  std::string test;
  for (std::size_t i : res.test) test += fmt::format("{}{}", test.empty() ? "" : ",", i);
  out << fmt::format("subsets={} best_chi2={} test=[{}]\n", res.subsets, format_real(res.chi2), test);
  return 0;
}

int cmd_synth(const SynthOptions& opt, std::ostream& out) {
  const FingerprintSet fps = synthesize(opt.config);
  auto file = open_out(opt.out);
  write_fingerprints(file, fps);
  out << opt.config.describe() << '\n';
  return 0;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Similarity-aware train/test splitting"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  std::string log = "info";
  app.add_option("--threads", threads, "Worker thread cap (default: SAE_THREADS or all cores)");
  app.add_option("--log", log, "quiet | info | trace")->check(CLI::IsMember({"quiet", "info", "trace"}));

  SimilarityOptions sim;
  auto* c_sim = app.add_subcommand("similarity", "Build a similarity matrix from fingerprints");
  c_sim->add_option("fingerprints", sim.fingerprints)->required();
  c_sim->add_option("--measure", sim.measure)->check(CLI::IsMember({"tanimoto", "dice", "sokal", "cosine"}));
  c_sim->add_option("--sparse-threshold", sim.sparse_threshold);
  c_sim->add_option("--out", sim.out)->required();

  SplitOptions split;
  auto* c_split = app.add_subcommand("split", "Split a dataset");
  c_split->add_option("matrix", split.matrix)->required();
  c_split->add_option("spec", split.spec)->required();
  c_split->add_option("--strategy", split.strategy)
      ->check(CLI::IsMember({"sae", "random", "stratified-max", "stratified-avg", "dissimilar"}));
  c_split->add_option("--seed", split.seed);
  c_split->add_option("--iterations", split.solver.iterations);
  c_split->add_option("--out", split.out)->required();
  c_split->add_option("--ids", split.ids, "Fingerprint file supplying sample ids");
  c_split->add_option("--step", split.solver.step);
  c_split->add_option("--dual-step", split.solver.dual_step);
  c_split->add_option("--lambda", split.solver.lambda, "Fixed entropy weight (default: scaled initial chi2)");
  c_split->add_option("--lambda-scale", split.solver.lambda_scale);
  c_split->add_flag("--adaptive", split.solver.adaptive, "Per-coordinate adaptive steps");
  c_split
      ->add_option_function<std::string>(
          "--constraint",
          [&split](const std::string& v) {
            split.solver.constraint =
                v == "dual" ? SolverConfig::Constraint::kDual : SolverConfig::Constraint::kProjection;
          },
          "How sum(w) = alpha N is enforced")
      ->check(CLI::IsMember({"projection", "dual"}));
  c_split->add_option("--threshold", split.threshold, "Dissimilar split threshold");

  EvaluateOptions eval;
  auto* c_eval = app.add_subcommand("evaluate", "Per-bin report of a split");
  c_eval->add_option("split", eval.split)->required();
  c_eval->add_option("matrix", eval.matrix)->required();
  c_eval->add_option("--boundaries", eval.boundaries);
  c_eval->add_option("--agg", eval.agg, "max | topk:<k>");
  c_eval->add_option("--predictions", eval.predictions);
  c_eval->add_option("--spec", eval.spec, "Distribution spec (bins and adherence)");
  c_eval->add_option("--csv", eval.csv);

  OracleOptions orc;
  auto* c_orc = app.add_subcommand("oracle", "Exhaustive optimum for N <= 20");
  c_orc->add_option("matrix", orc.matrix)->required();
  c_orc->add_option("spec", orc.spec)->required();
  c_orc->add_option("--n-test", orc.n_test);

  SynthOptions syn;
  auto* c_syn = app.add_subcommand("synth", "Generate clustered synthetic fingerprints");
  c_syn->add_option("n", syn.config.n)->required();
  c_syn->add_option("--clusters", syn.config.clusters);
  c_syn->add_option("--seed", syn.config.seed);
  c_syn->add_option("--bits", syn.config.n_bits);
  c_syn->add_option("--on-bits", syn.config.on_bits);
  c_syn->add_option("--quiet-noise", syn.config.quiet_hi, "Upper noise rate of quiet samples");
  c_syn->add_option("--noisy-lo", syn.config.noisy_lo);
  c_syn->add_option("--noisy-hi", syn.config.noisy_hi);
  c_syn->add_option("--noisy-fraction", syn.config.noisy_fraction);
  c_syn->add_option("--out", syn.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  set_num_threads(threads);
  const LogLevel level = log == "quiet" ? LogLevel::kQuiet : log == "trace" ? LogLevel::kTrace : LogLevel::kInfo;
  split.log = level;
  try {
    if (*c_sim) return cmd_similarity(sim, out);
    if (*c_split) return cmd_split(split, out);
    if (*c_eval) return cmd_evaluate(eval, out);
    if (*c_orc) return cmd_oracle(orc, out);
    if (*c_syn) return cmd_synth(syn, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  }
  return static_cast<int>(ExitCode::kUsage);
}

}  // namespace sae::cli
