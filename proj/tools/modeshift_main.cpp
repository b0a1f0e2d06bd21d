#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "modeshift/commands.hpp"

using namespace modeshift;

int main(int argc, char** argv) {
  CLI::App app{"Discrete-choice toolkit: survey raking, mode-choice estimation, "
               "value-of-time derivation and ride-hailing scenario sweeps"};
  app.require_subcommand(1);

  // weight
  WeightCommandArgs weight_args;
  auto* weight = app.add_subcommand("weight", "Rake survey weights to census margins (IPF)");
  weight->add_option("--respondents", weight_args.respondents, "Respondent CSV")->required();
  weight->add_option("--margins", weight_args.margins, "Census margins CSV")->required();
  weight->add_option("--out", weight_args.output_dir, "Output directory")->required();
  weight->add_option("--tol", weight_args.tolerance, "Max share residual (default 1e-6)");
  weight->add_option("--max-iter", weight_args.max_iterations,
                     "Max raking sweeps (default 1000)");
  double cap = 0.0;
  auto* cap_opt = weight->add_option("--cap", cap, "Optional weight cap");

  // estimate
  EstimateCommandArgs estimate_args;
  std::string purpose_filter;
  std::string weights_path;
  auto* estimate =
      app.add_subcommand("estimate", "Fit weighted multinomial logit mode-choice models");
  estimate->add_option("--observations", estimate_args.observations, "Observations CSV")
      ->required();
  estimate->add_option("--spec", estimate_args.spec, "Model specification JSON")->required();
  estimate->add_option("--out", estimate_args.output_dir, "Output directory")->required();
  estimate->add_option("--purpose", purpose_filter, "Estimate only this trip purpose");
  estimate->add_option("--weights", weights_path, "Respondent weights CSV");
  estimate->add_flag("--constants-only-null", estimate_args.constants_only_null,
                     "Use a constants-only null model for McFadden R2");

  // vot
  VotCommandArgs vot_args;
  std::vector<std::string> report_specs, cost_specs;
  auto* vot_cmd = app.add_subcommand("vot", "Derive value-of-time table from estimates");
  vot_cmd->add_option("--report", report_specs, "purpose=report.json (repeatable)")
      ->required();
  vot_cmd->add_option("--time-coef", vot_args.time_coefficient, "Time coefficient name")
      ->required();
  vot_cmd->add_option("--cost-coef", cost_specs, "income_group=coefficient (repeatable)")
      ->required();
  vot_cmd->add_option("--out", vot_args.output, "Output vot.csv")->required();

  // sweep
  SweepCommandArgs sweep_args;
  std::string sweep_preset, sweep_variant;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Run the travel-time x fare scenario grid");
  sweep_cmd->add_option("--config", sweep_args.run_config, "Run configuration JSON")
      ->required();
  sweep_cmd->add_option("--preset", sweep_preset,
                        "Grid preset override (paper-grid, paper-base)");
  sweep_cmd->add_option("--variant", sweep_variant,
                        "Variant override (normalized, as-printed)");

  // synth
  SynthCommandArgs synth_args;
  std::uint64_t seed = 0;
  std::string synth_config, model_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic trip population");
  auto* seed_opt = synth->add_option("--seed", seed, "RNG seed (required)");
  synth->add_option("--count", synth_args.count, "Number of trips (default 10000)");
  synth->add_option("--out", synth_args.output, "Output trips CSV")->required();
  synth->add_option("--trips-config", synth_config, "Synthetic population config JSON");
  synth->add_option("--emit-model", model_out, "Also write the companion model JSON");

  CLI11_PARSE(app, argc, argv);

  if (weight->parsed()) {
    if (cap_opt->count() > 0) weight_args.weight_cap = cap;
    return cmd_weight(weight_args, std::cout, std::cerr);
  }
  if (estimate->parsed()) {
    if (!purpose_filter.empty()) estimate_args.purpose = purpose_filter;
    if (!weights_path.empty()) estimate_args.weights = weights_path;
    return cmd_estimate(estimate_args, std::cout, std::cerr);
  }
  if (vot_cmd->parsed()) {
    auto split_pair = [](const std::string& text, const char* what, bool last) {
      // Income groups may contain '=' (">=1500"); coefficient names never do,
      // so --cost-coef splits at the last '='. Purposes never contain '='.
      auto pos = last ? text.rfind('=') : text.find('=');
      if (pos == std::string::npos || pos == 0 || pos + 1 == text.size()) {
        std::cerr << "error: " << what << " must look like key=value, got '" << text << "'\n";
        std::exit(kExitInputError);
      }
      return std::make_pair(text.substr(0, pos), text.substr(pos + 1));
    };
    for (const auto& spec : report_specs) {
      auto [purpose, path] = split_pair(spec, "--report", false);
      vot_args.reports[purpose] = path;
    }
    for (const auto& spec : cost_specs) {
      auto [group, coef] = split_pair(spec, "--cost-coef", true);
      vot_args.cost_coefficients[group] = coef;
    }
    return cmd_vot(vot_args, std::cout, std::cerr);
  }
  if (sweep_cmd->parsed()) {
    if (!sweep_preset.empty()) sweep_args.preset = sweep_preset;
    if (!sweep_variant.empty()) sweep_args.variant = sweep_variant;
    return cmd_sweep(sweep_args, std::cout, std::cerr);
  }
  if (synth->parsed()) {
    if (seed_opt->count() > 0) synth_args.seed = seed;
    if (!synth_config.empty()) synth_args.config = synth_config;
    if (!model_out.empty()) synth_args.model_out = model_out;
    return cmd_synth(synth_args, std::cout, std::cerr);
  }
  return kExitInputError;
}
