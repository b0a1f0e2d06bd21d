#include "modeshift/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>

#include "modeshift/estimate.hpp"
#include "modeshift/format.hpp"
#include "modeshift/io.hpp"
#include "modeshift/newmode.hpp"
#include "modeshift/scenario.hpp"
#include "modeshift/weighting.hpp"

namespace modeshift {

namespace {

using nlohmann::json;

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInputError;
  }
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

}  // namespace

int cmd_weight(const WeightCommandArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    MarginTable margins = load_margins(args.margins);
    LoadedRespondents loaded = load_respondents(args.respondents, margins);
    print_warnings(loaded.warnings, err);
    if (loaded.records.empty()) throw Error("no usable respondent records after ingestion");
    if (loaded.dropped_incomplete + loaded.dropped_unknown_category > 0)
      err << "note: dropped " << loaded.dropped_incomplete << " incomplete and "
          << loaded.dropped_unknown_category << " out-of-universe respondent(s)\n";

    IpfOptions options;
    options.tolerance = args.tolerance;
    options.max_iterations = args.max_iterations;
    options.weight_cap = args.weight_cap;
    IpfResult result = ipf(loaded.records, margins, options);

    std::map<std::string, std::map<std::string, double>> shares;
    for (const auto& [variable, categories] : margins.targets)
      shares[variable] = weighted_shares(loaded.records, result.weights, variable);
    double correlation = margin_correlation(shares, margins);

    std::filesystem::create_directories(args.output_dir);
    write_weights_csv(args.output_dir / "weights.csv", result.weights);
    IpfRunSummary summary;
    summary.report = result.report;
    summary.tolerance = options.tolerance;
    summary.n_respondents = static_cast<long long>(loaded.records.size());
    summary.dropped_incomplete = loaded.dropped_incomplete;
    summary.dropped_unknown_category = loaded.dropped_unknown_category;
    summary.correlation = correlation;
    summary.weight_min = result.weights.begin()->second;
    summary.weight_max = result.weights.begin()->second;
    for (const auto& [id, w] : result.weights) {
      summary.weight_min = std::min(summary.weight_min, w);
      summary.weight_max = std::max(summary.weight_max, w);
    }
    write_ipf_report_json(args.output_dir / "weight_report.json", summary);

    out << "raked " << loaded.records.size() << " respondents in "
        << result.report.iterations << " sweep(s); max residual "
        << format_double(result.report.max_residual) << ", correlation "
        << format_double(correlation) << '\n';
    if (!result.report.converged) {
      err << "warning: IPF did not reach tolerance " << format_double(options.tolerance)
          << " within " << options.max_iterations << " sweeps\n";
      return kExitNotConverged;
    }
    return kExitOk;
  });
}

namespace {

void print_coefficient_table(const EstimationResult& result, const std::string& purpose,
                             std::ostream& out) {
  out << purpose << ": n=" << result.n_observations
      << " LL=" << format_double(result.log_likelihood)
      << " LL0=" << format_double(result.null_log_likelihood)
      << " McFaddenR2=" << format_double(result.mcfadden_r2)
      << (result.converged ? "" : "  [NOT CONVERGED]") << '\n';
  out << "  " << std::left << std::setw(24) << "coefficient" << std::right << std::setw(14)
      << "value" << std::setw(14) << "std_error" << std::setw(10) << "t" << '\n';
  for (std::size_t k = 0; k < result.beta.size(); ++k) {
    double t = result.std_errors[k] > 0.0 ? result.beta[k] / result.std_errors[k] : 0.0;
    out << "  " << std::left << std::setw(24) << result.coefficient_names[k] << std::right
        << std::setw(14) << std::setprecision(5) << std::fixed << result.beta[k]
        << std::setw(14) << result.std_errors[k] << std::setw(10) << std::setprecision(2)
        << t << '\n';
    out.unsetf(std::ios::fixed);
    out << std::setprecision(6);
  }
}

}  // namespace

int cmd_estimate(const EstimateCommandArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    EstimationSpecFile spec_file = load_estimation_spec(args.spec);
    LoadedObservations loaded = load_observations(args.observations, spec_file);
    print_warnings(loaded.warnings, err);
    if (loaded.dropped_incomplete + loaded.dropped_unknown_chosen > 0)
      err << "note: dropped " << loaded.dropped_incomplete << " incomplete and "
          << loaded.dropped_unknown_chosen << " unknown-choice observation(s)\n";

    if (args.weights) {
      WeightVector weights = load_weights_csv(*args.weights);
      for (auto& obs : loaded.observations) {
        auto it = weights.find(obs.respondent_id);
        if (it == weights.end())
          throw Error("weights file has no entry for respondent '" + obs.respondent_id + "'");
        obs.weight = it->second;
      }
    }

    std::set<std::string> purposes;
    if (args.purpose) {
      purposes.insert(*args.purpose);
    } else {
      for (const auto& obs : loaded.observations) purposes.insert(obs.purpose);
    }
    if (purposes.empty()) throw Error("no observations to estimate");

    FitOptions options;
    if (args.constants_only_null) options.null_model = NullModel::ConstantsOnly;

    // Fit everything before writing anything.
    std::map<std::string, EstimationResult> results;
    for (const auto& purpose : purposes) {
      std::vector<ChoiceObservation> subset;
      for (const auto& obs : loaded.observations)
        if (obs.purpose == purpose) subset.push_back(obs);
      if (subset.empty())
        throw Error("no observations with purpose '" + purpose + "'");
      results[purpose] = fit(subset, spec_file.spec, options);
    }

    std::filesystem::create_directories(args.output_dir);
    bool all_converged = true;
    for (const auto& [purpose, result] : results) {
      write_estimation_report_json(args.output_dir / ("estimate_" + purpose + ".json"),
                                   purpose, result, loaded);
      write_coefficients_csv(args.output_dir / ("coefficients_" + purpose + ".csv"), result);
      print_coefficient_table(result, purpose, out);
      all_converged = all_converged && result.converged;
    }
    return all_converged ? kExitOk : kExitNotConverged;
  });
}

int cmd_vot(const VotCommandArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    if (args.reports.empty()) throw Error("no estimation reports given");
    if (args.cost_coefficients.empty()) throw Error("no cost coefficients given");

    std::map<std::pair<std::string, std::string>, double> table;
    for (const auto& [purpose, path] : args.reports) {
      EstimationResult result = load_estimation_report_json(path);
      double beta_time = result.coefficient(args.time_coefficient);
      for (const auto& [group, cost_name] : args.cost_coefficients) {
        double beta_cost = result.coefficient(cost_name);
        try {
          table[{group, purpose}] = vot(beta_time, beta_cost);
        } catch (const ZeroCostCoefficient&) {
          throw ZeroCostCoefficient("cost coefficient '" + cost_name + "' for income group '" +
                                    group + "' is zero");
        }
      }
    }

    std::filesystem::create_directories(args.output.parent_path());
    write_vot_csv(args.output, table);
    for (const auto& [key, value] : table)
      out << key.first << " " << key.second << ": " << format_double(value) << " EUR/hr\n";
    return kExitOk;
  });
}

int cmd_sweep(const SweepCommandArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    RunConfig config = load_run_config(args.run_config);
    print_warnings(config.warnings, err);
    if (args.preset) config.grid = grid_preset(*args.preset);
    if (args.variant) config.params.variant = eq3_variant_from_string(*args.variant);

    AggregationOptions options;
    options.sample = config.sample;
    options.seed = config.seed.value_or(0);
    std::vector<SweepRow> rows =
        sweep(config.trips, config.model, config.params, config.vots, config.grid, options);

    std::filesystem::create_directories(config.output_dir);
    write_results_csv(config.output_dir / "results.csv", rows, config.model);
    write_summary_csv(config.output_dir / "summary.csv", rows);
    write_manifest_json(config.output_dir / "manifest.json", config);

    for (const auto& row : rows) {
      double rh_weighted = 0.0;
      long long n = 0;
      for (const auto& [purpose, shares] : row.split.shares) {
        auto it = shares.find(kRideHailing);
        double share = it == shares.end() ? 0.0 : it->second;
        long long count = row.split.trip_counts.at(purpose);
        rh_weighted += share * static_cast<double>(count);
        n += count;
      }
      out << std::left << std::setw(20) << row.scenario.label << " RH share "
          << format_double(rh_weighted / static_cast<double>(n)) << '\n';
    }
    out << "wrote " << rows.size() << " scenario(s) to " << config.output_dir.string() << '\n';
    return kExitOk;
  });
}

namespace {

SyntheticTripsConfig load_synth_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }

  SyntheticTripsConfig config;
  if (j.contains("purpose_mix")) {
    config.purpose_mix.clear();
    for (const auto& [key, value] : j["purpose_mix"].items())
      config.purpose_mix[purpose_from_string(key)] = value.get<double>();
  }
  if (j.contains("income_mix")) {
    config.income_mix.clear();
    for (const auto& [key, value] : j["income_mix"].items())
      config.income_mix[key] = value.get<double>();
  }
  if (j.contains("mode_constants")) {
    config.mode_constants.clear();
    for (const auto& [key, value] : j["mode_constants"].items())
      config.mode_constants[key] = value.get<double>();
  }
  auto maybe = [&](const char* key, double& target) {
    if (j.contains(key)) target = j[key].get<double>();
  };
  maybe("service_area_fraction", config.service_area_fraction);
  maybe("auto_time_median_min", config.auto_time_median_min);
  maybe("auto_time_sigma", config.auto_time_sigma);
  maybe("speed_kmh", config.speed_kmh);
  maybe("speed_jitter_sigma", config.speed_jitter_sigma);
  maybe("beta_time", config.beta_time);
  maybe("beta_cost", config.beta_cost);
  maybe("utility_noise_sigma", config.utility_noise_sigma);
  maybe("walk_max_km", config.walk_max_km);
  maybe("train_min_km", config.train_min_km);
  return config;
}

}  // namespace

int cmd_synth(const SynthCommandArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    if (!args.seed)
      throw InvalidConfig("synth requires an explicit --seed; randomness is never implicit");
    if (args.count <= 0) throw InvalidConfig("trip count must be positive");

    SyntheticTripsConfig config;
    if (args.config) config = load_synth_config(*args.config);
    config.validate();

    NestedLogitModel model = standard_synthetic_model();
    std::set<ModeId> configured;
    for (const auto& [mode, asc] : config.mode_constants) configured.insert(mode);
    if (configured != std::set<ModeId>(model.modes.begin(), model.modes.end()))
      throw InvalidConfig(
          "synthetic generation supports the standard mode set "
          "(walk, bicycle, autoDriver, autoPassenger, bus, metro, train); "
          "write a custom model and trips file for other sets");

    std::vector<Trip> trips =
        generate_synthetic_trips(*args.seed, static_cast<std::size_t>(args.count), config);

    if (!args.output.parent_path().empty())
      std::filesystem::create_directories(args.output.parent_path());
    write_trips_csv(args.output, trips, model);
    if (args.model_out) write_model_json(*args.model_out, model);

    out << "wrote " << trips.size() << " trips to " << args.output.string();
    if (args.model_out) out << " and model to " << args.model_out->string();
    out << '\n';
    return kExitOk;
  });
}

}  // namespace modeshift
