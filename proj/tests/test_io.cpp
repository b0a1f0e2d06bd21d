#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "modeshift/csv.hpp"
#include "modeshift/format.hpp"
#include "modeshift/io.hpp"
#include "testutil.hpp"

using namespace modeshift;
using testutil::make_test_dir;
using testutil::spit;

TEST_CASE("csv: quoting, comments, schema version") {
  auto dir = make_test_dir("csv_basics");
  write_csv(dir / "t.csv", {"a", "b"}, {{"plain", "with,comma"}, {"quote\"inside", "x"}});
  auto table = read_csv(dir / "t.csv");
  CHECK(table.comments.size() == 1);
  CHECK(table.comments[0] == "# schema_version=1");
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][1] == "with,comma");
  CHECK(table.rows[1][0] == "quote\"inside");

  spit(dir / "v2.csv", "# schema_version=2\na,b\n1,2\n");
  CHECK_THROWS_AS(read_csv(dir / "v2.csv"), IoError);

  spit(dir / "ragged.csv", "a,b\n1,2,3\n");
  CHECK_THROWS_AS(read_csv(dir / "ragged.csv"), IoError);

  spit(dir / "empty.csv", "");
  CHECK_THROWS_AS(read_csv(dir / "empty.csv"), IoError);

  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("format/parse doubles round-trip") {
  testutil::Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-12.0, 12.0));
    CHECK(parse_double(format_double(x), "test") == x);
  }
  CHECK_THROWS_AS(parse_double("1,5", "test"), IoError);
  CHECK_THROWS_AS(parse_double("", "test"), IoError);
  CHECK_THROWS_AS(parse_double("12x", "test"), IoError);
}

TEST_CASE("margins: load and validation errors") {
  auto dir = make_test_dir("margins");
  spit(dir / "margins.csv",
       "variable,category,target_share\n"
       "gender,male,0.4892\ngender,female,0.5108\n"
       "age,young,0.4\nage,old,0.6\n");
  auto margins = load_margins(dir / "margins.csv");
  CHECK(margins.targets.at("gender").at("male") == 0.4892);
  CHECK(margins.targets.size() == 2);

  spit(dir / "bad_sum.csv", "variable,category,target_share\ng,a,0.6\ng,b,0.6\n");
  CHECK_THROWS_AS(load_margins(dir / "bad_sum.csv"), Error);

  spit(dir / "dup.csv", "variable,category,target_share\ng,a,0.5\ng,a,0.5\n");
  CHECK_THROWS_AS(load_margins(dir / "dup.csv"), IoError);

  spit(dir / "no_col.csv", "variable,category\ng,a\n");
  CHECK_THROWS_AS(load_margins(dir / "no_col.csv"), IoError);
}

TEST_CASE("respondents: ingestion drops are counted, unknown columns warn") {
  auto dir = make_test_dir("respondents");
  MarginTable margins;
  margins.targets["gender"] = {{"m", 0.5}, {"f", 0.5}};
  spit(dir / "r.csv",
       "respondent_id,gender,extra\n"
       "r1,m,1\n"
       "r2,f,2\n"
       "r3,,3\n"        // incomplete
       "r4,diverse,4\n"  // outside the margin universe
       "r5,m,5\n");
  auto loaded = load_respondents(dir / "r.csv", margins);
  CHECK(loaded.records.size() == 3);
  CHECK(loaded.dropped_incomplete == 1);
  CHECK(loaded.dropped_unknown_category == 1);
  REQUIRE(loaded.warnings.size() == 1);
  CHECK(loaded.warnings[0].find("extra") != std::string::npos);

  spit(dir / "dup.csv", "respondent_id,gender\nr1,m\nr1,f\n");
  CHECK_THROWS_AS(load_respondents(dir / "dup.csv", margins), IoError);
}

TEST_CASE("weights round-trip") {
  auto dir = make_test_dir("weights");
  WeightVector weights = {{"r1", 1.0871111}, {"r2", 0.92}, {"r3", 10.41}};
  write_weights_csv(dir / "weights.csv", weights);
  auto loaded = load_weights_csv(dir / "weights.csv");
  REQUIRE(loaded.size() == 3);
  for (const auto& [id, w] : weights) CHECK(loaded.at(id) == w);

  spit(dir / "bad.csv", "respondent_id,weight\nr1,0\n");
  CHECK_THROWS_AS(load_weights_csv(dir / "bad.csv"), IoError);
}

TEST_CASE("model json round-trip and two-level enforcement") {
  auto dir = make_test_dir("model");
  auto model = standard_synthetic_model(0.5, 0.7, -0.045);
  write_model_json(dir / "model.json", model);
  auto loaded = load_model(dir / "model.json");
  CHECK(loaded.modes == model.modes);
  CHECK(loaded.reference_mode == "metro");
  CHECK(loaded.coefficients.at("beta_gc_metro") == -0.045);
  REQUIRE(loaded.nests.size() == 4);
  CHECK(loaded.nest_of("metro").name == "transit");
  CHECK(loaded.nest_of("metro").nesting_coefficient == 0.5);

  spit(dir / "three_level.json", R"({
    "schema_version": 1,
    "modes": ["a", "b"],
    "nests": [
      {"name": "inner", "members": ["a", "b"], "nesting_coefficient": 0.5},
      {"name": "outer", "members": ["inner"], "nesting_coefficient": 0.8}
    ],
    "reference_mode": "a"
  })");
  CHECK_THROWS_AS(load_model(dir / "three_level.json"), InvalidModel);

  spit(dir / "bad_version.json", R"({"schema_version": 99, "modes": []})");
  CHECK_THROWS_AS(load_model(dir / "bad_version.json"), IoError);
}

TEST_CASE("trips csv round-trip with unavailable modes") {
  auto dir = make_test_dir("trips");
  auto model = standard_synthetic_model();
  auto trips = generate_synthetic_trips(21, 50);
  write_trips_csv(dir / "trips.csv", trips, model);
  auto loaded = load_trips(dir / "trips.csv", model);
  REQUIRE(loaded.trips.size() == trips.size());
  for (std::size_t i = 0; i < trips.size(); ++i) {
    CHECK(loaded.trips[i].id == trips[i].id);
    CHECK(loaded.trips[i].purpose == trips[i].purpose);
    CHECK(loaded.trips[i].auto_time_min == trips[i].auto_time_min);  // to_chars round-trip
    CHECK(loaded.trips[i].in_service_area == trips[i].in_service_area);
    for (const auto& mode : model.modes) {
      CHECK(loaded.trips[i].base_utilities.available(mode) ==
            trips[i].base_utilities.available(mode));
      if (trips[i].base_utilities.available(mode))
        CHECK(loaded.trips[i].base_utilities.at(mode) == trips[i].base_utilities.at(mode));
    }
  }

  spit(dir / "bad_bool.csv",
       "trip_id,purpose,auto_time_min,distance_km,metro_time_min,metro_cost_eur,"
       "income_group,in_service_area,util_walk,util_bicycle,util_autoDriver,"
       "util_autoPassenger,util_bus,util_metro,util_train\n"
       "1,HBW,20,8,30,3,<1500,maybe,0,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(load_trips(dir / "bad_bool.csv", model), IoError);

  spit(dir / "bad_purpose.csv",
       "trip_id,purpose,auto_time_min,distance_km,metro_time_min,metro_cost_eur,"
       "income_group,in_service_area,util_walk,util_bicycle,util_autoDriver,"
       "util_autoPassenger,util_bus,util_metro,util_train\n"
       "1,XXX,20,8,30,3,<1500,1,0,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(load_trips(dir / "bad_purpose.csv", model), IoError);
}

TEST_CASE("estimation spec and observations") {
  auto dir = make_test_dir("obs");
  spit(dir / "spec.json", R"({
    "schema_version": 1,
    "alternatives": [
      {"name": "rideHailing", "suffix": "rh"},
      {"name": "auto", "suffix": "auto"},
      {"name": "transit", "suffix": "transit"}
    ],
    "reference_alternative": "transit",
    "terms": [
      {"name": "asc_rh", "kind": "constant", "alternatives": ["rideHailing"]},
      {"name": "asc_auto", "kind": "constant", "alternatives": ["auto"]},
      {"name": "b_time", "kind": "attribute", "attribute": "time",
       "alternatives": ["rideHailing", "auto", "transit"]},
      {"name": "b_cost_low", "kind": "attribute", "attribute": "cost",
       "interact_with": "low_income",
       "alternatives": ["rideHailing", "auto", "transit"]},
      {"name": "b_autos_rh", "kind": "socio", "variable": "hh_autos",
       "alternatives": ["rideHailing"]}
    ]
  })");
  auto spec_file = load_estimation_spec(dir / "spec.json");
  CHECK(spec_file.spec.terms.size() == 5);
  CHECK(spec_file.suffixes.at("rideHailing") == "rh");

  spit(dir / "obs.csv",
       "respondent_id,purpose,scenario_id,chosen,weight,time_rh,time_auto,time_transit,"
       "cost_rh,cost_auto,cost_transit,low_income,hh_autos,ignored\n"
       "r1,HBW,s1,rideHailing,1.2,18,22,34,12,4,3,1,0,x\n"
       "r1,HBW,s2,auto,1.2,20,22,34,6,4,3,1,0,x\n"
       "r2,HBO,s1,transit,0.8,18,25,30,12,5,3,0,2,x\n"
       "r3,HBW,s1,taxi,1,18,25,30,12,5,3,0,1,x\n"
       "r4,HBW,s1,auto,1,18,,30,12,5,3,0,1,x\n");
  auto loaded = load_observations(dir / "obs.csv", spec_file);
  CHECK(loaded.observations.size() == 3);
  CHECK(loaded.dropped_unknown_chosen == 1);  // taxi
  CHECK(loaded.dropped_incomplete == 1);      // empty time_auto
  REQUIRE(loaded.warnings.size() == 1);
  CHECK(loaded.warnings[0].find("ignored") != std::string::npos);
  CHECK(loaded.observations[0].weight == 1.2);
  CHECK(loaded.observations[0].alternative_attributes.at("rideHailing").at("time") == 18.0);
  CHECK(loaded.observations[2].sociodemographics.at("hh_autos") == 2.0);

  // A column required by the spec but absent from the file is a hard error
  // naming the column.
  spit(dir / "missing_col.csv",
       "respondent_id,purpose,scenario_id,chosen,time_rh,time_auto,time_transit,"
       "cost_rh,cost_auto,cost_transit,hh_autos\n"
       "r1,HBW,s1,auto,18,22,34,12,4,3,0\n");
  try {
    load_observations(dir / "missing_col.csv", spec_file);
    FAIL("expected MissingAttribute");
  } catch (const MissingAttribute& e) {
    CHECK(std::string(e.what()).find("low_income") != std::string::npos);
  }

  spit(dir / "bad_weight.csv",
       "respondent_id,purpose,scenario_id,chosen,weight,time_rh,time_auto,time_transit,"
       "cost_rh,cost_auto,cost_transit,low_income,hh_autos\n"
       "r1,HBW,s1,auto,-1,18,22,34,12,4,3,1,0\n");
  CHECK_THROWS_AS(load_observations(dir / "bad_weight.csv", spec_file), IoError);

  spit(dir / "bad_spec.json", R"({
    "schema_version": 1,
    "alternatives": [{"name": "a", "suffix": "a"}, {"name": "b", "suffix": "b"}],
    "reference_alternative": "b",
    "terms": [{"name": "asc_b", "kind": "constant", "alternatives": ["b"]}]
  })");
  CHECK_THROWS_AS(load_estimation_spec(dir / "bad_spec.json"), InvalidConfig);
}

TEST_CASE("estimation report round-trip") {
  auto dir = make_test_dir("report");
  EstimationResult result;
  result.coefficient_names = {"b_time", "b_cost"};
  result.beta = {-0.0512, -0.31};
  result.std_errors = {0.004, 0.02};
  result.log_likelihood = -712.4;
  result.null_log_likelihood = -1033.1;
  result.mcfadden_r2 = 0.3104;
  result.converged = true;
  result.iterations = 6;
  result.n_observations = 940;
  LoadedObservations data;
  write_estimation_report_json(dir / "estimate_HBW.json", "HBW", result, data);
  auto loaded = load_estimation_report_json(dir / "estimate_HBW.json");
  CHECK(loaded.coefficient("b_time") == -0.0512);
  CHECK(loaded.std_errors[1] == 0.02);
  CHECK(loaded.log_likelihood == -712.4);
  CHECK(loaded.converged);
  CHECK_THROWS_AS(loaded.coefficient("nope"), UnknownVariable);
}

TEST_CASE("run config: happy path and fail-fast validation") {
  auto dir = make_test_dir("runcfg");
  auto model = standard_synthetic_model();
  write_model_json(dir / "model.json", model);
  write_trips_csv(dir / "trips.csv", generate_synthetic_trips(3, 40), model);

  const std::string vot_block = R"("vot": {
    "ride_hailing": {
      "<1500": {"HBW": 13.48, "HBO": 10.47},
      ">=1500": {"HBW": 15.92, "HBO": 18.35}
    },
    "base": {
      "transit": {"<1500": {"HBW": 8.94, "HBO": 5.06},
                  "1500-5600": {"HBW": 17.3, "HBO": 9.78},
                  ">5600": {"HBW": 23.5, "HBO": 13.29}}
    },
    "income_group_map": {"<1500": "<1500", "1500-5600": ">=1500", ">5600": ">=1500"},
    "purpose_map": {"HBW": "HBW", "HBE": "HBO", "HBS": "HBO", "HBO": "HBO",
                    "NHBW": "HBW", "NHBO": "HBO"}
  })";

  spit(dir / "run.json", R"({
    "schema_version": 1,
    "trips": "trips.csv",
    "model": "model.json",
    "output_dir": "out",
    "variant": "normalized",
    "seed": 7,
    "new_mode": {"time_sensitivity_ratio": 1.1},
    )" + vot_block + R"(,
    "grid": {"preset": "paper-grid"}
  })");

  auto config = load_run_config(dir / "run.json");
  CHECK(config.trips.size() == 40);
  CHECK(config.grid.size() == 17);
  CHECK(config.params.time_sensitivity_ratio == 1.1);
  // beta_gc_metro falls back to the model coefficient, nc to the transit nest.
  CHECK(config.params.beta_gc_metro == -0.05);
  CHECK(config.params.nesting_coefficient == 0.5);
  CHECK(config.seed.has_value());
  CHECK(*config.seed == 7);
  CHECK(config.config_hash.size() == 16);
  // Trip-level VOT expansion: three trip groups x six purposes.
  CHECK(config.vots.ride_hailing.size() == 18);

  spit(dir / "bad_variant.json", R"({
    "schema_version": 1, "trips": "trips.csv", "model": "model.json",
    "output_dir": "out", "variant": "other",
    "new_mode": {"time_sensitivity_ratio": 1.0},
    )" + vot_block + R"(, "grid": {"preset": "paper-grid"}
  })");
  CHECK_THROWS_AS(load_run_config(dir / "bad_variant.json"), InvalidConfig);

  spit(dir / "sampled_no_seed.json", R"({
    "schema_version": 1, "trips": "trips.csv", "model": "model.json",
    "output_dir": "out", "aggregate": "sampled",
    "new_mode": {"time_sensitivity_ratio": 1.0},
    )" + vot_block + R"(, "grid": {"preset": "paper-grid"}
  })");
  CHECK_THROWS_AS(load_run_config(dir / "sampled_no_seed.json"), InvalidConfig);

  spit(dir / "bad_preset.json", R"({
    "schema_version": 1, "trips": "trips.csv", "model": "model.json",
    "output_dir": "out",
    "new_mode": {"time_sensitivity_ratio": 1.0},
    )" + vot_block + R"(, "grid": {"preset": "nope"}
  })");
  CHECK_THROWS_AS(load_run_config(dir / "bad_preset.json"), InvalidConfig);

  // A nesting coefficient contradicting the model is rejected up front.
  spit(dir / "bad_nc.json", R"({
    "schema_version": 1, "trips": "trips.csv", "model": "model.json",
    "output_dir": "out",
    "new_mode": {"time_sensitivity_ratio": 1.0, "nesting_coefficient": 0.9},
    )" + vot_block + R"(, "grid": {"preset": "paper-grid"}
  })");
  CHECK_THROWS_AS(load_run_config(dir / "bad_nc.json"), InvalidConfig);

  // Income group present in trips but absent from the map fails coverage.
  std::string incomplete = R"({
    "schema_version": 1, "trips": "trips.csv", "model": "model.json",
    "output_dir": "out",
    "new_mode": {"time_sensitivity_ratio": 1.0},
    "vot": {
      "ride_hailing": {"<1500": {"HBW": 13.48, "HBO": 10.47}},
      "base": {"transit": {"<1500": {"HBW": 8.94, "HBO": 5.06}}},
      "income_group_map": {"<1500": "<1500"},
      "purpose_map": {"HBW": "HBW", "HBE": "HBO", "HBS": "HBO", "HBO": "HBO",
                      "NHBW": "HBW", "NHBO": "HBO"}
    },
    "grid": {"preset": "paper-grid"}
  })";
  spit(dir / "uncovered.json", incomplete);
  CHECK_THROWS_AS(load_run_config(dir / "uncovered.json"), InvalidConfig);

  SUBCASE("optional survey references are validated when present") {
    spit(dir / "margins.csv", "variable,category,target_share\ng,a,0.5\ng,b,0.5\n");
    spit(dir / "with_survey.json", R"({
      "schema_version": 1, "trips": "trips.csv", "model": "model.json",
      "output_dir": "out", "margins": "margins.csv", "margin_tolerance": 1e-7,
      "new_mode": {"time_sensitivity_ratio": 1.0},
      )" + vot_block + R"(, "grid": {"preset": "paper-grid"}
    })");
    auto with_survey = load_run_config(dir / "with_survey.json");
    REQUIRE(with_survey.margins_path.has_value());
    CHECK(with_survey.margin_tolerance == 1e-7);

    spit(dir / "broken_survey.json", R"({
      "schema_version": 1, "trips": "trips.csv", "model": "model.json",
      "output_dir": "out", "margins": "nonexistent.csv",
      "new_mode": {"time_sensitivity_ratio": 1.0},
      )" + vot_block + R"(, "grid": {"preset": "paper-grid"}
    })");
    CHECK_THROWS_AS(load_run_config(dir / "broken_survey.json"), IoError);

    spit(dir / "obs_no_spec.json", R"({
      "schema_version": 1, "trips": "trips.csv", "model": "model.json",
      "output_dir": "out", "observations": "obs.csv",
      "new_mode": {"time_sensitivity_ratio": 1.0},
      )" + vot_block + R"(, "grid": {"preset": "paper-grid"}
    })");
    CHECK_THROWS_AS(load_run_config(dir / "obs_no_spec.json"), InvalidConfig);
  }

  SUBCASE("explicit scenario lists and custom grids parse") {
    spit(dir / "custom.json", R"({
      "schema_version": 1, "trips": "trips.csv", "model": "model.json",
      "output_dir": "out",
      "new_mode": {"time_sensitivity_ratio": 1.0},
      )" + vot_block + R"(,
      "grid": {"time_levels": [[1.0, 0], [1.3, 11]], "fares": [1.0, 2.0],
               "include_baseline": false}
    })");
    auto custom = load_run_config(dir / "custom.json");
    CHECK(custom.grid.size() == 4);
    CHECK(custom.grid[1].fare_per_km == 2.0);
    CHECK(custom.grid[2].tt_factor == 1.3);
    CHECK(custom.grid[2].wait_min == 11.0);

    spit(dir / "explicit.json", R"({
      "schema_version": 1, "trips": "trips.csv", "model": "model.json",
      "output_dir": "out",
      "new_mode": {"time_sensitivity_ratio": 1.0},
      )" + vot_block + R"(,
      "grid": {"scenarios": [
        {"label": "only", "tt_factor": 1.2, "wait_min": 5, "fare_per_km": 2.5}
      ]}
    })");
    auto explicit_grid = load_run_config(dir / "explicit.json");
    CHECK(explicit_grid.grid.size() == 1);
    CHECK(explicit_grid.grid[0].label == "only");
  }
}

TEST_CASE("vot csv writer shape") {
  auto dir = make_test_dir("votcsv");
  std::map<std::pair<std::string, std::string>, double> table = {
      {{"<1500", "HBW"}, 13.48},
      {{"<1500", "HBO"}, 10.47},
      {{">=1500", "HBW"}, 15.92},
      {{">=1500", "HBO"}, 18.35}};
  write_vot_csv(dir / "vot.csv", table);
  auto csv = read_csv(dir / "vot.csv");
  CHECK(csv.header == std::vector<std::string>{"income_group", "purpose", "vot_eur_per_hr"});
  CHECK(csv.rows.size() == 4);
}
