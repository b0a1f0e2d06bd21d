#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modeshift/choice.hpp"
#include "modeshift/estimate.hpp"
#include "modeshift/newmode.hpp"
#include "modeshift/scenario.hpp"
#include "modeshift/weighting.hpp"

namespace modeshift {

inline constexpr const char* kToolVersion = "0.1.0";

// ---- survey weighting files -------------------------------------------------

// margins.csv: variable, category, target_share
MarginTable load_margins(const std::filesystem::path& path);

struct LoadedRespondents {
  std::vector<RespondentRecord> records;
  long long dropped_incomplete = 0;        // empty category cells
  long long dropped_unknown_category = 0;  // categories outside the margin universe
  std::vector<std::string> warnings;
};

// Respondent CSV: respondent_id plus one column per control variable.
LoadedRespondents load_respondents(const std::filesystem::path& path,
                                   const MarginTable& margins);

void write_weights_csv(const std::filesystem::path& path, const WeightVector& weights);
WeightVector load_weights_csv(const std::filesystem::path& path);

struct IpfRunSummary {
  IpfReport report;
  double tolerance = 0.0;
  long long n_respondents = 0;
  long long dropped_incomplete = 0;
  long long dropped_unknown_category = 0;
  double correlation = 0.0;
  double weight_min = 0.0;
  double weight_max = 0.0;
};

void write_ipf_report_json(const std::filesystem::path& path, const IpfRunSummary& summary);

// ---- estimation files -------------------------------------------------------

struct EstimationSpecFile {
  ModelSpec spec;
  std::map<std::string, std::string> suffixes;  // alternative name -> column suffix
};

EstimationSpecFile load_estimation_spec(const std::filesystem::path& path);

struct LoadedObservations {
  std::vector<ChoiceObservation> observations;
  long long dropped_incomplete = 0;      // empty attribute/socio cells
  long long dropped_unknown_chosen = 0;  // chosen outside the alternative set
  std::vector<std::string> warnings;
};

// Wide-format observations: one row per respondent x scenario, attribute
// columns named <attribute>_<suffix>.
LoadedObservations load_observations(const std::filesystem::path& path,
                                     const EstimationSpecFile& spec_file);

void write_estimation_report_json(const std::filesystem::path& path,
                                  const std::string& purpose, const EstimationResult& result,
                                  const LoadedObservations& data);
EstimationResult load_estimation_report_json(const std::filesystem::path& path);

void write_coefficients_csv(const std::filesystem::path& path,
                            const EstimationResult& result);

// vot.csv: income_group, purpose, vot_eur_per_hr
void write_vot_csv(const std::filesystem::path& path,
                   const std::map<std::pair<std::string, std::string>, double>& table);

// ---- model and trips --------------------------------------------------------

NestedLogitModel load_model(const std::filesystem::path& path);
void write_model_json(const std::filesystem::path& path, const NestedLogitModel& model);

struct LoadedTrips {
  std::vector<Trip> trips;
  std::vector<std::string> warnings;
};

// trips.csv: trip_id, purpose, auto_time_min, distance_km, metro_time_min,
// metro_cost_eur, income_group, in_service_area, util_<mode> per model mode
// (empty cell = mode unavailable).
LoadedTrips load_trips(const std::filesystem::path& path, const NestedLogitModel& model);

void write_trips_csv(const std::filesystem::path& path, const std::vector<Trip>& trips,
                     const NestedLogitModel& model);

// ---- run configuration ------------------------------------------------------

struct RunConfig {
  std::filesystem::path trips_path;
  std::filesystem::path model_path;
  std::filesystem::path output_dir;
  // Optional survey-side paths; validated on load when present so one config
  // can describe the whole pipeline.
  std::optional<std::filesystem::path> observations_path;
  std::optional<std::filesystem::path> margins_path;
  std::optional<std::filesystem::path> estimation_spec_path;
  double margin_tolerance = 1e-6;
  NestedLogitModel model;
  std::vector<Trip> trips;
  NewModeParams params;
  VotTable vots;
  std::vector<Scenario> grid;
  std::optional<std::uint64_t> seed;
  bool sample = false;
  std::string config_hash;  // fnv1a64 of the run file bytes, hex
  std::vector<std::string> warnings;
};

// Fail-fast: loads and validates the model, the trips, the VOT coverage and
// the grid before returning; nothing downstream re-validates.
RunConfig load_run_config(const std::filesystem::path& path);

// ---- sweep outputs ----------------------------------------------------------

void write_results_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows,
                       const NestedLogitModel& model);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
void write_manifest_json(const std::filesystem::path& path, const RunConfig& config);

}  // namespace modeshift
