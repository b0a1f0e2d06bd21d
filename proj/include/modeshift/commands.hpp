#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>

namespace modeshift {

// Stable exit-code contract for scripting.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;

struct WeightCommandArgs {
  std::filesystem::path respondents;
  std::filesystem::path margins;
  std::filesystem::path output_dir;
  double tolerance = 1e-6;
  int max_iterations = 1000;
  std::optional<double> weight_cap;
};

// Rakes survey weights to the census margins; writes weights.csv and
// weight_report.json. Exit 2 flags non-convergence (weights still written).
int cmd_weight(const WeightCommandArgs& args, std::ostream& out, std::ostream& err);

struct EstimateCommandArgs {
  std::filesystem::path observations;
  std::filesystem::path spec;
  std::filesystem::path output_dir;
  std::optional<std::string> purpose;  // default: one model per purpose in the data
  std::optional<std::filesystem::path> weights;  // respondent-level weights CSV
  bool constants_only_null = false;
};

// Fits one weighted MNL per purpose; writes estimate_<purpose>.json and
// coefficients_<purpose>.csv and prints the coefficient tables.
int cmd_estimate(const EstimateCommandArgs& args, std::ostream& out, std::ostream& err);

struct VotCommandArgs {
  std::map<std::string, std::filesystem::path> reports;  // purpose -> estimation report
  std::string time_coefficient;
  std::map<std::string, std::string> cost_coefficients;  // income group -> coefficient
  std::filesystem::path output;  // vot.csv
};

// Derives the value-of-time table (income group x purpose) from estimation
// reports.
int cmd_vot(const VotCommandArgs& args, std::ostream& out, std::ostream& err);

struct SweepCommandArgs {
  std::filesystem::path run_config;
  std::optional<std::string> preset;   // overrides the config's grid
  std::optional<std::string> variant;  // overrides the config's variant
};

// Runs the scenario grid over the trip population; writes results.csv,
// summary.csv and manifest.json into the configured output directory.
int cmd_sweep(const SweepCommandArgs& args, std::ostream& out, std::ostream& err);

struct SynthCommandArgs {
  std::optional<std::uint64_t> seed;  // required; no silent default
  long long count = 10000;
  std::filesystem::path output;  // trips.csv
  std::optional<std::filesystem::path> config;  // synthetic config JSON
  std::optional<std::filesystem::path> model_out;  // companion model.json
};

// Generates a reproducible synthetic trip table (and optionally the matching
// base model file).
int cmd_synth(const SynthCommandArgs& args, std::ostream& out, std::ostream& err);

}  // namespace modeshift
