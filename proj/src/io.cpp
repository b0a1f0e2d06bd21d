#include "modeshift/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "modeshift/csv.hpp"
#include "modeshift/format.hpp"

namespace modeshift {

using nlohmann::json;

namespace {

constexpr int kJsonSchemaVersion = 1;

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

const json& require_field(const json& j, const char* key, const std::string& file) {
  auto it = j.find(key);
  if (it == j.end()) throw IoError(file + ": missing field '" + std::string(key) + "'");
  return *it;
}

void check_json_schema_version(const json& j, const std::string& file) {
  const json& v = require_field(j, "schema_version", file);
  if (!v.is_number_integer() || v.get<int>() != kJsonSchemaVersion)
    throw IoError(file + ": unsupported schema_version");
}

double as_number(const json& j, const std::string& context) {
  if (!j.is_number()) throw IoError(context + ": expected a number");
  return j.get<double>();
}

std::string as_string(const json& j, const std::string& context) {
  if (!j.is_string()) throw IoError(context + ": expected a string");
  return j.get<std::string>();
}

bool parse_bool_cell(const std::string& text, const std::string& context) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw IoError(context + ": invalid boolean '" + text + "'");
}

std::string row_context(const CsvTable& table, std::size_t row) {
  // +2: header line plus 1-based counting; comment lines shift this, but the
  // row index is still the fastest way to locate the record.
  return table.source.string() + ": data row " + std::to_string(row + 1);
}

void warn_unknown_columns(const CsvTable& table, const std::set<std::string>& known,
                          std::vector<std::string>& warnings) {
  std::vector<std::string> unknown;
  for (const auto& name : table.header)
    if (!known.count(name)) unknown.push_back(name);
  if (!unknown.empty()) {
    std::string msg = table.source.string() + ": ignoring unknown column(s):";
    for (const auto& name : unknown) msg += " " + name;
    warnings.push_back(msg);
  }
}

std::string hash_file_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::uint64_t h = fnv1a64(buf.str());
  char out[17];
  snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return std::string(out);
}

}  // namespace

// ---- survey weighting files -------------------------------------------------

MarginTable load_margins(const std::filesystem::path& path) {
  CsvTable table = read_csv(path);
  std::size_t vi = table.require_column("variable");
  std::size_t ci = table.require_column("category");
  std::size_t si = table.require_column("target_share");

  MarginTable margins;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string& variable = row[vi];
    const std::string& category = row[ci];
    if (variable.empty() || category.empty())
      throw IoError(row_context(table, r) + ": empty variable or category");
    double share = parse_double(row[si], row_context(table, r));
    if (!margins.targets[variable].emplace(category, share).second)
      throw IoError(row_context(table, r) + ": duplicate category '" + category + "' for '" +
                    variable + "'");
  }
  margins.validate();
  return margins;
}

LoadedRespondents load_respondents(const std::filesystem::path& path,
                                   const MarginTable& margins) {
  CsvTable table = read_csv(path);
  std::size_t id_col = table.require_column("respondent_id");
  std::map<std::string, std::size_t> var_cols;
  for (const auto& [variable, categories] : margins.targets)
    var_cols[variable] = table.require_column(variable);

  LoadedRespondents out;
  std::set<std::string> known = {"respondent_id"};
  for (const auto& [variable, col] : var_cols) known.insert(variable);
  warn_unknown_columns(table, known, out.warnings);

  std::set<std::string> seen_ids;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    RespondentRecord rec;
    rec.id = row[id_col];
    if (rec.id.empty()) throw IoError(row_context(table, r) + ": empty respondent_id");
    if (!seen_ids.insert(rec.id).second)
      throw IoError(row_context(table, r) + ": duplicate respondent_id '" + rec.id + "'");

    bool incomplete = false;
    bool unknown_category = false;
    for (const auto& [variable, col] : var_cols) {
      const std::string& category = row[col];
      if (category.empty()) {
        incomplete = true;
        break;
      }
      if (!margins.targets.at(variable).count(category)) {
        unknown_category = true;
        break;
      }
      rec.categories[variable] = category;
    }
    if (incomplete) {
      ++out.dropped_incomplete;
    } else if (unknown_category) {
      ++out.dropped_unknown_category;
    } else {
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

void write_weights_csv(const std::filesystem::path& path, const WeightVector& weights) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [id, w] : weights) rows.push_back({id, format_double(w)});
  write_csv(path, {"respondent_id", "weight"}, rows);
}

WeightVector load_weights_csv(const std::filesystem::path& path) {
  CsvTable table = read_csv(path);
  std::size_t id_col = table.require_column("respondent_id");
  std::size_t w_col = table.require_column("weight");
  WeightVector weights;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    double w = parse_double(table.rows[r][w_col], row_context(table, r));
    if (!(w > 0.0)) throw IoError(row_context(table, r) + ": non-positive weight");
    if (!weights.emplace(table.rows[r][id_col], w).second)
      throw IoError(row_context(table, r) + ": duplicate respondent_id");
  }
  return weights;
}

void write_ipf_report_json(const std::filesystem::path& path, const IpfRunSummary& summary) {
  json j;
  j["schema_version"] = kJsonSchemaVersion;
  j["converged"] = summary.report.converged;
  j["iterations"] = summary.report.iterations;
  j["max_residual"] = summary.report.max_residual;
  j["tolerance"] = summary.tolerance;
  j["n_respondents"] = summary.n_respondents;
  j["dropped_incomplete"] = summary.dropped_incomplete;
  j["dropped_unknown_category"] = summary.dropped_unknown_category;
  j["margin_correlation"] = summary.correlation;
  j["weight_min"] = summary.weight_min;
  j["weight_max"] = summary.weight_max;
  write_json(path, j);
}

// ---- estimation files -------------------------------------------------------

EstimationSpecFile load_estimation_spec(const std::filesystem::path& path) {
  json j = load_json(path);
  const std::string file = path.string();
  check_json_schema_version(j, file);

  EstimationSpecFile out;
  for (const auto& alt : require_field(j, "alternatives", file)) {
    std::string name = as_string(require_field(alt, "name", file), file + ": alternative name");
    std::string suffix =
        as_string(require_field(alt, "suffix", file), file + ": alternative suffix");
    out.spec.alternatives.push_back(name);
    if (!out.suffixes.emplace(name, suffix).second)
      throw IoError(file + ": duplicate alternative '" + name + "'");
  }
  out.spec.reference_alternative =
      as_string(require_field(j, "reference_alternative", file), file);

  for (const auto& jt : require_field(j, "terms", file)) {
    SpecTerm term;
    term.name = as_string(require_field(jt, "name", file), file + ": term name");
    std::string kind = as_string(require_field(jt, "kind", file), file + ": term kind");
    if (kind == "constant") {
      term.kind = SpecTerm::Kind::Constant;
    } else if (kind == "attribute") {
      term.kind = SpecTerm::Kind::Attribute;
      term.attribute = as_string(require_field(jt, "attribute", file), file);
      if (jt.contains("interact_with")) term.socio = as_string(jt["interact_with"], file);
    } else if (kind == "socio") {
      term.kind = SpecTerm::Kind::Socio;
      term.socio = as_string(require_field(jt, "variable", file), file);
    } else {
      throw IoError(file + ": term '" + term.name + "' has unknown kind '" + kind + "'");
    }
    for (const auto& alt : require_field(jt, "alternatives", file))
      term.alternatives.push_back(as_string(alt, file + ": term alternatives"));
    out.spec.terms.push_back(std::move(term));
  }
  out.spec.validate();
  return out;
}

LoadedObservations load_observations(const std::filesystem::path& path,
                                     const EstimationSpecFile& spec_file) {
  const ModelSpec& spec = spec_file.spec;
  CsvTable table = read_csv(path);

  std::size_t id_col = table.require_column("respondent_id");
  std::size_t purpose_col = table.require_column("purpose");
  std::size_t scenario_col = table.require_column("scenario_id");
  std::size_t chosen_col = table.require_column("chosen");
  std::optional<std::size_t> weight_col = table.column("weight");

  // Attribute columns are <attribute>_<suffix>; a missing column is a schema
  // error named after the column, not a droppable cell.
  std::map<std::pair<std::string, std::string>, std::size_t> attr_cols;
  std::map<std::string, std::size_t> socio_cols;
  for (const auto& term : spec.terms) {
    if (term.kind == SpecTerm::Kind::Attribute) {
      for (const auto& alt : term.alternatives) {
        std::string column = term.attribute + "_" + spec_file.suffixes.at(alt);
        auto idx = table.column(column);
        if (!idx)
          throw MissingAttribute(table.source.string() + ": missing column '" + column +
                                 "' required by term '" + term.name + "'");
        attr_cols[{term.attribute, alt}] = *idx;
      }
    }
    if (!term.socio.empty()) {
      auto idx = table.column(term.socio);
      if (!idx)
        throw MissingAttribute(table.source.string() + ": missing column '" + term.socio +
                               "' required by term '" + term.name + "'");
      socio_cols[term.socio] = *idx;
    }
  }

  LoadedObservations out;
  std::set<std::string> known = {"respondent_id", "purpose", "scenario_id", "chosen", "weight"};
  for (const auto& [key, col] : attr_cols) known.insert(table.header[col]);
  for (const auto& [name, col] : socio_cols) known.insert(name);
  warn_unknown_columns(table, known, out.warnings);

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    ChoiceObservation obs;
    obs.respondent_id = row[id_col];
    obs.purpose = row[purpose_col];
    obs.scenario_id = row[scenario_col];
    obs.chosen = row[chosen_col];

    if (obs.chosen.empty()) {
      ++out.dropped_incomplete;
      continue;
    }
    if (std::find(spec.alternatives.begin(), spec.alternatives.end(), obs.chosen) ==
        spec.alternatives.end()) {
      ++out.dropped_unknown_chosen;
      continue;
    }

    bool incomplete = false;
    for (const auto& [key, col] : attr_cols) {
      if (row[col].empty()) {
        incomplete = true;
        break;
      }
      obs.alternative_attributes[key.second][key.first] =
          parse_double(row[col], row_context(table, r) + " column '" + table.header[col] + "'");
    }
    if (!incomplete) {
      for (const auto& [name, col] : socio_cols) {
        if (row[col].empty()) {
          incomplete = true;
          break;
        }
        obs.sociodemographics[name] =
            parse_double(row[col], row_context(table, r) + " column '" + name + "'");
      }
    }
    if (incomplete) {
      ++out.dropped_incomplete;
      continue;
    }

    if (weight_col && !row[*weight_col].empty()) {
      obs.weight = parse_double(row[*weight_col], row_context(table, r) + " column 'weight'");
      if (!(obs.weight > 0.0))
        throw IoError(row_context(table, r) + ": non-positive weight");
    }
    out.observations.push_back(std::move(obs));
  }
  return out;
}

void write_estimation_report_json(const std::filesystem::path& path,
                                  const std::string& purpose, const EstimationResult& result,
                                  const LoadedObservations& data) {
  json j;
  j["schema_version"] = kJsonSchemaVersion;
  j["purpose"] = purpose;
  j["n_observations"] = result.n_observations;
  j["dropped_incomplete"] = data.dropped_incomplete;
  j["dropped_unknown_chosen"] = data.dropped_unknown_chosen;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["log_likelihood"] = result.log_likelihood;
  j["null_log_likelihood"] = result.null_log_likelihood;
  j["mcfadden_r2"] = result.mcfadden_r2;
  j["gradient_norm"] = result.gradient_norm;
  json coeffs = json::array();
  for (std::size_t k = 0; k < result.beta.size(); ++k) {
    json c;
    c["name"] = result.coefficient_names[k];
    c["value"] = result.beta[k];
    c["std_error"] = result.std_errors[k];
    c["t_stat"] = result.std_errors[k] > 0.0 ? result.beta[k] / result.std_errors[k] : 0.0;
    coeffs.push_back(c);
  }
  j["coefficients"] = coeffs;
  write_json(path, j);
}

EstimationResult load_estimation_report_json(const std::filesystem::path& path) {
  json j = load_json(path);
  const std::string file = path.string();
  check_json_schema_version(j, file);
  EstimationResult result;
  result.log_likelihood = as_number(require_field(j, "log_likelihood", file), file);
  result.null_log_likelihood = as_number(require_field(j, "null_log_likelihood", file), file);
  result.mcfadden_r2 = as_number(require_field(j, "mcfadden_r2", file), file);
  result.converged = require_field(j, "converged", file).get<bool>();
  result.iterations = require_field(j, "iterations", file).get<int>();
  result.n_observations = require_field(j, "n_observations", file).get<long long>();
  for (const auto& c : require_field(j, "coefficients", file)) {
    result.coefficient_names.push_back(as_string(require_field(c, "name", file), file));
    result.beta.push_back(as_number(require_field(c, "value", file), file));
    result.std_errors.push_back(as_number(require_field(c, "std_error", file), file));
  }
  return result;
}

void write_coefficients_csv(const std::filesystem::path& path,
                            const EstimationResult& result) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < result.beta.size(); ++k)
    rows.push_back({result.coefficient_names[k], format_double(result.beta[k]),
                    format_double(result.std_errors[k])});
  write_csv(path, {"name", "value", "std_error"}, rows);
}

void write_vot_csv(const std::filesystem::path& path,
                   const std::map<std::pair<std::string, std::string>, double>& table) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [key, value] : table)
    rows.push_back({key.first, key.second, format_double(value)});
  write_csv(path, {"income_group", "purpose", "vot_eur_per_hr"}, rows);
}

// ---- model and trips --------------------------------------------------------

NestedLogitModel load_model(const std::filesystem::path& path) {
  json j = load_json(path);
  const std::string file = path.string();
  check_json_schema_version(j, file);

  NestedLogitModel model;
  for (const auto& m : require_field(j, "modes", file))
    model.modes.push_back(as_string(m, file + ": modes"));

  std::set<std::string> nest_names;
  for (const auto& jn : require_field(j, "nests", file)) {
    NestSpec nest;
    nest.name = as_string(require_field(jn, "name", file), file + ": nest name");
    nest.nesting_coefficient =
        as_number(require_field(jn, "nesting_coefficient", file), file + ": nest nc");
    for (const auto& m : require_field(jn, "members", file))
      nest.members.push_back(as_string(m, file + ": nest members"));
    nest_names.insert(nest.name);
    model.nests.push_back(std::move(nest));
  }
  // Two levels only: a nest member that names another nest would be a third
  // level and is rejected here.
  for (const auto& nest : model.nests)
    for (const auto& m : nest.members)
      if (nest_names.count(m) &&
          std::find(model.modes.begin(), model.modes.end(), m) == model.modes.end())
        throw InvalidModel(file + ": nest '" + nest.name + "' nests another nest ('" + m +
                           "'); only two levels are supported");

  model.reference_mode = as_string(require_field(j, "reference_mode", file), file);
  if (j.contains("coefficients"))
    for (const auto& [name, value] : j["coefficients"].items())
      model.coefficients[name] = as_number(value, file + ": coefficient " + name);
  model.validate();
  return model;
}

void write_model_json(const std::filesystem::path& path, const NestedLogitModel& model) {
  model.validate();
  json j;
  j["schema_version"] = kJsonSchemaVersion;
  j["modes"] = model.modes;
  json nests = json::array();
  for (const auto& nest : model.nests) {
    json jn;
    jn["name"] = nest.name;
    jn["members"] = nest.members;
    jn["nesting_coefficient"] = nest.nesting_coefficient;
    nests.push_back(jn);
  }
  j["nests"] = nests;
  j["reference_mode"] = model.reference_mode;
  j["coefficients"] = model.coefficients;
  write_json(path, j);
}

LoadedTrips load_trips(const std::filesystem::path& path, const NestedLogitModel& model) {
  CsvTable table = read_csv(path);
  std::size_t id_col = table.require_column("trip_id");
  std::size_t purpose_col = table.require_column("purpose");
  std::size_t time_col = table.require_column("auto_time_min");
  std::size_t dist_col = table.require_column("distance_km");
  std::size_t mtime_col = table.require_column("metro_time_min");
  std::size_t mcost_col = table.require_column("metro_cost_eur");
  std::size_t income_col = table.require_column("income_group");
  std::size_t area_col = table.require_column("in_service_area");
  std::map<ModeId, std::size_t> util_cols;
  for (const auto& mode : model.modes)
    util_cols[mode] = table.require_column("util_" + mode);

  LoadedTrips out;
  std::set<std::string> known = {"trip_id",        "purpose",       "auto_time_min",
                                 "distance_km",    "metro_time_min", "metro_cost_eur",
                                 "income_group",   "in_service_area"};
  for (const auto& mode : model.modes) known.insert("util_" + mode);
  warn_unknown_columns(table, known, out.warnings);

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string ctx = row_context(table, r);
    Trip trip;
    trip.id = parse_int(row[id_col], ctx + " column 'trip_id'");
    try {
      trip.purpose = purpose_from_string(row[purpose_col]);
    } catch (const Error& e) {
      throw IoError(ctx + ": " + e.what());
    }
    trip.auto_time_min = parse_double(row[time_col], ctx + " column 'auto_time_min'");
    trip.distance_km = parse_double(row[dist_col], ctx + " column 'distance_km'");
    trip.metro_time_min = parse_double(row[mtime_col], ctx + " column 'metro_time_min'");
    trip.metro_cost_eur = parse_double(row[mcost_col], ctx + " column 'metro_cost_eur'");
    trip.income_group = row[income_col];
    trip.in_service_area = parse_bool_cell(row[area_col], ctx + " column 'in_service_area'");
    for (const auto& [mode, col] : util_cols) {
      if (row[col].empty())
        trip.base_utilities.set_unavailable(mode);
      else
        trip.base_utilities.set(mode,
                                parse_double(row[col], ctx + " column 'util_" + mode + "'"));
    }
    try {
      trip.validate();
    } catch (const Error& e) {
      throw IoError(ctx + ": " + e.what());
    }
    out.trips.push_back(std::move(trip));
  }
  return out;
}

void write_trips_csv(const std::filesystem::path& path, const std::vector<Trip>& trips,
                     const NestedLogitModel& model) {
  std::vector<std::string> header = {"trip_id",        "purpose",        "auto_time_min",
                                     "distance_km",    "metro_time_min", "metro_cost_eur",
                                     "income_group",   "in_service_area"};
  for (const auto& mode : model.modes) header.push_back("util_" + mode);

  std::vector<std::vector<std::string>> rows;
  for (const auto& trip : trips) {
    std::vector<std::string> row = {std::to_string(trip.id),
                                    to_string(trip.purpose),
                                    format_double(trip.auto_time_min),
                                    format_double(trip.distance_km),
                                    format_double(trip.metro_time_min),
                                    format_double(trip.metro_cost_eur),
                                    trip.income_group,
                                    trip.in_service_area ? "1" : "0"};
    for (const auto& mode : model.modes)
      row.push_back(trip.base_utilities.available(mode)
                        ? format_double(trip.base_utilities.at(mode))
                        : "");
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

// ---- run configuration ------------------------------------------------------

namespace {

VotTable expand_vot_table(const json& jv, const std::string& file) {
  VotTable vots;
  const json& jrh = require_field(jv, "ride_hailing", file);
  const json& jbase = require_field(jv, "base", file);
  const json& jgmap = require_field(jv, "income_group_map", file);
  const json& jpmap = require_field(jv, "purpose_map", file);
  if (jgmap.empty()) throw InvalidConfig(file + ": income_group_map is empty");
  if (jpmap.empty()) throw InvalidConfig(file + ": purpose_map is empty");

  std::map<std::string, std::string> group_map, purpose_map;
  for (const auto& [trip_group, rh_group] : jgmap.items())
    group_map[trip_group] = as_string(rh_group, file + ": income_group_map");
  for (const auto& [trip_purpose, vot_purpose] : jpmap.items()) {
    purpose_from_string(trip_purpose);  // keys must be real purposes
    purpose_map[trip_purpose] = as_string(vot_purpose, file + ": purpose_map");
  }

  auto lookup = [&](const json& table, const std::string& key,
                    const std::string& what) -> const json& {
    auto it = table.find(key);
    if (it == table.end())
      throw InvalidConfig(file + ": " + what + " has no entry '" + key + "'");
    return *it;
  };

  for (const auto& [trip_group, rh_group] : group_map) {
    const json& per_purpose = lookup(jrh, rh_group, "vot.ride_hailing");
    for (const auto& [trip_purpose, vot_purpose] : purpose_map) {
      vots.ride_hailing[{trip_group, trip_purpose}] = as_number(
          lookup(per_purpose, vot_purpose, "vot.ride_hailing['" + rh_group + "']"),
          file + ": vot.ride_hailing");
    }
  }
  for (const auto& [mode_class, per_group] : jbase.items()) {
    for (const auto& [trip_group, rh_group] : group_map) {
      const json& per_purpose =
          lookup(per_group, trip_group, "vot.base['" + mode_class + "']");
      for (const auto& [trip_purpose, vot_purpose] : purpose_map) {
        vots.base[{mode_class, trip_group, trip_purpose}] = as_number(
            lookup(per_purpose, vot_purpose,
                   "vot.base['" + mode_class + "']['" + trip_group + "']"),
            file + ": vot.base");
      }
    }
  }
  vots.validate();
  return vots;
}

std::vector<Scenario> parse_grid(const json& jg, const std::string& file) {
  if (jg.contains("preset"))
    return grid_preset(as_string(jg["preset"], file + ": grid.preset"));
  std::vector<Scenario> grid;
  if (jg.contains("scenarios")) {
    for (const auto& js : jg["scenarios"]) {
      Scenario s;
      s.label = as_string(require_field(js, "label", file), file + ": scenario label");
      s.tt_factor = as_number(require_field(js, "tt_factor", file), file);
      s.wait_min = as_number(require_field(js, "wait_min", file), file);
      s.fare_per_km = as_number(require_field(js, "fare_per_km", file), file);
      if (js.contains("rh_enabled")) s.rh_enabled = js["rh_enabled"].get<bool>();
      s.validate();
      grid.push_back(std::move(s));
    }
    if (grid.empty()) throw InvalidConfig(file + ": grid.scenarios is empty");
    return grid;
  }
  if (jg.contains("time_levels") && jg.contains("fares")) {
    bool include_baseline = true;
    if (jg.contains("include_baseline")) include_baseline = jg["include_baseline"].get<bool>();
    if (include_baseline) {
      Scenario baseline;
      baseline.label = "baseline";
      baseline.rh_enabled = false;
      baseline.fare_per_km = 0.0;
      grid.push_back(baseline);
    }
    for (const auto& level : jg["time_levels"]) {
      if (!level.is_array() || level.size() != 2)
        throw InvalidConfig(file + ": time_levels entries must be [tt_factor, wait_min]");
      double tt = as_number(level[0], file);
      double wait = as_number(level[1], file);
      for (const auto& jf : jg["fares"]) {
        double fare = as_number(jf, file);
        Scenario s;
        s.label = "tt" + format_double(tt) + "_w" + format_double(wait) + "_f" +
                  format_double(fare);
        s.tt_factor = tt;
        s.wait_min = wait;
        s.fare_per_km = fare;
        s.validate();
        grid.push_back(std::move(s));
      }
    }
    if (grid.empty()) throw InvalidConfig(file + ": grid is empty");
    return grid;
  }
  throw InvalidConfig(file + ": grid needs 'preset', 'scenarios' or 'time_levels'+'fares'");
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  json j = load_json(path);
  const std::string file = path.string();
  check_json_schema_version(j, file);

  RunConfig cfg;
  cfg.config_hash = hash_file_hex(path);
  const auto base_dir = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base_dir / fp;
  };

  cfg.trips_path = resolve(as_string(require_field(j, "trips", file), file + ": trips"));
  cfg.model_path = resolve(as_string(require_field(j, "model", file), file + ": model"));
  cfg.output_dir =
      resolve(as_string(require_field(j, "output_dir", file), file + ": output_dir"));

  cfg.model = load_model(cfg.model_path);
  LoadedTrips trips = load_trips(cfg.trips_path, cfg.model);
  cfg.trips = std::move(trips.trips);
  cfg.warnings = std::move(trips.warnings);
  if (cfg.trips.empty()) throw InvalidConfig(file + ": trip table is empty");

  const json& jp = require_field(j, "new_mode", file);
  cfg.params.time_sensitivity_ratio =
      as_number(require_field(jp, "time_sensitivity_ratio", file), file);
  if (jp.contains("fare_per_km"))
    cfg.params.fare_per_km = as_number(jp["fare_per_km"], file);
  if (jp.contains("beta_gc_metro")) {
    cfg.params.beta_gc_metro = as_number(jp["beta_gc_metro"], file);
  } else if (cfg.model.coefficients.count("beta_gc_metro")) {
    cfg.params.beta_gc_metro = cfg.model.coefficients.at("beta_gc_metro");
  } else {
    throw InvalidConfig(file +
                        ": beta_gc_metro missing from new_mode and model coefficients");
  }
  const NestSpec& transit_nest = cfg.model.nest_of(cfg.model.reference_mode);
  if (jp.contains("nesting_coefficient")) {
    cfg.params.nesting_coefficient = as_number(jp["nesting_coefficient"], file);
    if (cfg.params.nesting_coefficient != transit_nest.nesting_coefficient)
      throw InvalidConfig(file + ": new_mode.nesting_coefficient must match the transit nest");
  } else {
    cfg.params.nesting_coefficient = transit_nest.nesting_coefficient;
  }
  if (j.contains("variant"))
    cfg.params.variant = eq3_variant_from_string(as_string(j["variant"], file));
  cfg.params.validate();

  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("aggregate")) {
    std::string aggregate = as_string(j["aggregate"], file + ": aggregate");
    if (aggregate == "sampled") {
      cfg.sample = true;
    } else if (aggregate != "expected") {
      throw InvalidConfig(file + ": aggregate must be 'expected' or 'sampled'");
    }
  }
  if (cfg.sample && !cfg.seed)
    throw InvalidConfig(file + ": sampled aggregation requires an explicit seed");

  cfg.vots = expand_vot_table(require_field(j, "vot", file), file);
  cfg.grid = parse_grid(require_field(j, "grid", file), file);

  // Survey-side references are optional but must parse when present.
  if (j.contains("margins")) {
    cfg.margins_path = resolve(as_string(j["margins"], file + ": margins"));
    load_margins(*cfg.margins_path);
  }
  if (j.contains("estimation_spec")) {
    cfg.estimation_spec_path =
        resolve(as_string(j["estimation_spec"], file + ": estimation_spec"));
    load_estimation_spec(*cfg.estimation_spec_path);
  }
  if (j.contains("observations")) {
    cfg.observations_path = resolve(as_string(j["observations"], file + ": observations"));
    if (!cfg.estimation_spec_path)
      throw InvalidConfig(file + ": observations given without estimation_spec");
    load_observations(*cfg.observations_path,
                      load_estimation_spec(*cfg.estimation_spec_path));
  }
  if (j.contains("margin_tolerance")) {
    cfg.margin_tolerance = as_number(j["margin_tolerance"], file + ": margin_tolerance");
    if (!(cfg.margin_tolerance > 0.0))
      throw InvalidConfig(file + ": margin_tolerance must be positive");
  }

  // Every (income group, purpose) the trips can query must resolve now.
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& trip : cfg.trips) pairs.insert({trip.income_group, to_string(trip.purpose)});
  for (const auto& [group, purpose] : pairs) {
    cfg.vots.rh_vot(group, purpose);
    cfg.vots.base_vot("transit", group, purpose);
  }
  return cfg;
}

// ---- sweep outputs ----------------------------------------------------------

void write_results_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows,
                       const NestedLogitModel& model) {
  std::vector<ModeId> universe = model.modes;
  universe.push_back(kRideHailing);

  std::vector<std::vector<std::string>> out;
  for (const auto& row : rows) {
    for (const auto& [purpose, shares] : row.split.shares) {
      for (const auto& mode : universe) {
        auto it = shares.find(mode);
        double share = it == shares.end() ? 0.0 : it->second;
        out.push_back({row.scenario.label, format_double(row.scenario.tt_factor),
                       format_double(row.scenario.wait_min),
                       format_double(row.scenario.fare_per_km), to_string(purpose), mode,
                       format_double(share),
                       std::to_string(row.split.trip_counts.at(purpose))});
      }
    }
  }
  write_csv(path,
            {"scenario_label", "tt_factor", "wait_min", "fare_per_km", "purpose", "mode",
             "share", "n_trips"},
            out);
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::vector<std::vector<std::string>> out;
  for (const auto& row : rows) {
    for (const auto& [purpose, shares] : row.split.shares) {
      auto it = shares.find(kRideHailing);
      double rh_share = it == shares.end() ? 0.0 : it->second;
      out.push_back({row.scenario.label, format_double(row.scenario.tt_factor),
                     format_double(row.scenario.wait_min),
                     format_double(row.scenario.fare_per_km), to_string(purpose),
                     format_double(rh_share),
                     format_double(row.split.mass_deviation.at(purpose)),
                     std::to_string(row.split.trip_counts.at(purpose))});
    }
  }
  write_csv(path,
            {"scenario_label", "tt_factor", "wait_min", "fare_per_km", "purpose", "rh_share",
             "mass_deviation", "n_trips"},
            out);
}

void write_manifest_json(const std::filesystem::path& path, const RunConfig& config) {
  json j;
  j["schema_version"] = kJsonSchemaVersion;
  j["tool"] = "modeshift";
  j["version"] = kToolVersion;
  j["config_fnv1a64"] = config.config_hash;
  if (config.seed)
    j["seed"] = *config.seed;
  else
    j["seed"] = nullptr;
  j["variant"] = to_string(config.params.variant);
  j["aggregate"] = config.sample ? "sampled" : "expected";
  j["n_trips"] = config.trips.size();
  j["n_scenarios"] = config.grid.size();
  j["outputs"] = {"results.csv", "summary.csv", "manifest.json"};
  write_json(path, j);
}

}  // namespace modeshift
