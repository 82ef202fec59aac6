#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "sae/solver.hpp"
#include "sae/synth.hpp"

namespace sae::cli {

enum class LogLevel { kQuiet, kInfo, kTrace };

struct SimilarityOptions {
  std::string fingerprints;
  std::string measure = "tanimoto";
  std::optional<double> sparse_threshold;
  std::string out;
};

struct SplitOptions {
  std::string matrix;
  std::string spec;
  std::string strategy = "sae";
  std::uint64_t seed = 0;
  std::string out;
  std::string ids;  // optional fingerprint file naming the samples
  SolverConfig solver;  // seed is taken from `seed`
  std::optional<double> threshold;  // dissimilar
  LogLevel log = LogLevel::kInfo;
};

struct EvaluateOptions {
  std::string split;
  std::string matrix;
  std::string boundaries = "0,0.33333333333333331,0.66666666666666663,1";
  std::string agg = "max";
  std::string predictions;
  std::string spec;  // optional, for adherence
  std::string csv;   // optional CSV output path
};

struct OracleOptions {
  std::string matrix;
  std::string spec;
  std::optional<std::size_t> n_test;
};

struct SynthOptions {
  SynthConfig config;
  std::string out;
};

// Each command writes human-readable output to `out` and returns an exit code.
// Library errors propagate as sae::Error.
int cmd_similarity(const SimilarityOptions& opt, std::ostream& out);
int cmd_split(const SplitOptions& opt, std::ostream& out);
int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out);
int cmd_oracle(const OracleOptions& opt, std::ostream& out);
int cmd_synth(const SynthOptions& opt, std::ostream& out);

// Parses argv and dispatches; maps errors to exit codes.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace sae::cli
