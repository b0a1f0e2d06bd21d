#include "modeshift/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "modeshift/format.hpp"

namespace modeshift {

const std::vector<Purpose>& all_purposes() {
  static const std::vector<Purpose> purposes = {Purpose::HBW,  Purpose::HBE, Purpose::HBS,
                                                Purpose::HBO,  Purpose::NHBW,
                                                Purpose::NHBO};
  return purposes;
}

Purpose purpose_from_string(const std::string& s) {
  if (s == "HBW") return Purpose::HBW;
  if (s == "HBE") return Purpose::HBE;
  if (s == "HBS") return Purpose::HBS;
  if (s == "HBO") return Purpose::HBO;
  if (s == "NHBW") return Purpose::NHBW;
  if (s == "NHBO") return Purpose::NHBO;
  throw Error("unknown trip purpose '" + s + "'");
}

std::string to_string(Purpose p) {
  switch (p) {
    case Purpose::HBW: return "HBW";
    case Purpose::HBE: return "HBE";
    case Purpose::HBS: return "HBS";
    case Purpose::HBO: return "HBO";
    case Purpose::NHBW: return "NHBW";
    case Purpose::NHBO: return "NHBO";
  }
  throw Error("invalid purpose value");
}

void Trip::validate() const {
  if (!(auto_time_min > 0.0))
    throw Error("trip " + std::to_string(id) + ": auto time must be positive");
  if (!(distance_km > 0.0))
    throw Error("trip " + std::to_string(id) + ": distance must be positive");
  if (metro_time_min < 0.0 || metro_cost_eur < 0.0)
    throw Error("trip " + std::to_string(id) + ": negative metro attribute");
  if (income_group.empty())
    throw Error("trip " + std::to_string(id) + ": empty income group");
}

void Scenario::validate() const {
  if (label.empty()) throw InvalidConfig("scenario without label");
  if (!(tt_factor >= 1.0))
    throw InvalidConfig("scenario '" + label + "': travel-time factor must be >= 1");
  if (wait_min < 0.0)
    throw InvalidConfig("scenario '" + label + "': negative waiting time");
  if (fare_per_km < 0.0)
    throw InvalidConfig("scenario '" + label + "': negative fare");
}

namespace {

std::string grid_label(double tt, double wait, double fare) {
  return "tt" + format_double(tt) + "_w" + format_double(wait) + "_f" + format_double(fare);
}

}  // namespace

std::vector<Scenario> default_grid() {
  const std::vector<std::pair<double, double>> time_levels = {
      {1.0, 0.0}, {1.1, 4.0}, {1.2, 8.0}, {1.5, 18.0}};
  const std::vector<double> fares = {0.75, 1.5, 3.0, 6.0};

  std::vector<Scenario> grid;
  Scenario baseline;
  baseline.label = "baseline";
  baseline.rh_enabled = false;
  baseline.fare_per_km = 0.0;
  grid.push_back(baseline);
  for (const auto& [tt, wait] : time_levels) {
    for (double fare : fares) {
      Scenario s;
      s.label = grid_label(tt, wait, fare);
      s.tt_factor = tt;
      s.wait_min = wait;
      s.fare_per_km = fare;
      grid.push_back(s);
    }
  }
  return grid;
}

Scenario paper_base_scenario() {
  Scenario s;
  s.label = "paper-base";
  s.tt_factor = 1.0;
  s.wait_min = 0.0;
  s.fare_per_km = 3.0;
  return s;
}

std::vector<Scenario> grid_preset(const std::string& name) {
  if (name == "paper-grid") return default_grid();
  if (name == "paper-base") {
    Scenario baseline;
    baseline.label = "baseline";
    baseline.rh_enabled = false;
    baseline.fare_per_km = 0.0;
    return {baseline, paper_base_scenario()};
  }
  throw InvalidConfig("unknown grid preset '" + name + "'");
}

namespace {

// All scenario randomness (sampled aggregation, synthetic trips) flows
// through this: mt19937_64 plus inverse-transform draws, so identical seeds
// give identical streams.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    double u1 = std::max(uniform(), 1e-300);
    double u2 = uniform();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

private:
  std::mt19937_64 gen_;
};

template <typename Key>
Key pick(const std::map<Key, double>& mix, double u) {
  double cum = 0.0;
  for (const auto& [key, share] : mix) {
    cum += share;
    if (u < cum) return key;
  }
  return mix.rbegin()->first;
}

ModeId sample_mode(const std::map<ModeId, double>& probs, double u) {
  double total = 0.0;
  for (const auto& [mode, p] : probs) total += p;
  double cum = 0.0;
  for (const auto& [mode, p] : probs) {
    cum += p;
    if (u * total < cum) return mode;
  }
  return probs.rbegin()->first;
}

}  // namespace

ModalSplit run_scenario(const std::vector<Trip>& trips, const NestedLogitModel& base_model,
                        const NewModeParams& params, const VotTable& vots,
                        const Scenario& scenario, const AggregationOptions& options) {
  if (trips.empty()) throw Error("no trips to evaluate");
  scenario.validate();
  base_model.validate();

  NewModeParams scenario_params = params;
  scenario_params.fare_per_km = scenario.fare_per_km;

  std::vector<ModeId> universe = base_model.modes;
  universe.push_back(kRideHailing);

  std::map<Purpose, std::map<ModeId, double>> sums;
  std::map<Purpose, long long> counts;
  Rng rng(options.seed ^ fnv1a64(scenario.label));

  for (const auto& trip : trips) {
    trip.validate();
    std::map<ModeId, double> probs;
    if (!scenario.rh_enabled) {
      probs = nested_probabilities(base_model, trip.base_utilities);
      probs[kRideHailing] = 0.0;
    } else {
      try {
        RhTripContext ctx;
        ctx.time_rh_min = scenario.tt_factor * trip.auto_time_min + scenario.wait_min;
        ctx.distance_km = trip.distance_km;
        ctx.income_group = trip.income_group;
        ctx.purpose = to_string(trip.purpose);
        ctx.in_service_area = trip.in_service_area;
        ctx.gc_metro_min =
            generalized_cost(trip.metro_time_min, trip.metro_cost_eur,
                             vots.base_vot("transit", trip.income_group, ctx.purpose))
                .minutes;
        probs = inject_rh(base_model, trip.base_utilities, ctx, scenario_params, vots)
                    .probabilities;
      } catch (const Error& e) {
        throw Error("trip " + std::to_string(trip.id) + ": " + e.what());
      }
    }

    auto& bucket = sums[trip.purpose];
    if (options.sample) {
      bucket[sample_mode(probs, rng.uniform())] += 1.0;
      for (const auto& mode : universe) bucket[mode] += 0.0;
    } else {
      for (const auto& mode : universe) {
        auto it = probs.find(mode);
        bucket[mode] += it == probs.end() ? 0.0 : it->second;
      }
    }
    counts[trip.purpose] += 1;
  }

  ModalSplit split;
  for (const auto& [purpose, bucket] : sums) {
    double n = static_cast<double>(counts.at(purpose));
    double total = 0.0;
    for (const auto& [mode, sum] : bucket) {
      split.shares[purpose][mode] = sum / n;
      total += sum / n;
    }
    split.trip_counts[purpose] = counts.at(purpose);
    split.mass_deviation[purpose] = total - 1.0;
  }
  return split;
}

std::vector<SweepRow> sweep(const std::vector<Trip>& trips,
                            const NestedLogitModel& base_model, const NewModeParams& params,
                            const VotTable& vots, const std::vector<Scenario>& grid,
                            const AggregationOptions& options) {
  if (grid.empty()) throw InvalidConfig("empty scenario grid");
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (const auto& scenario : grid)
    rows.push_back({scenario, run_scenario(trips, base_model, params, vots, scenario, options)});
  return rows;
}

void SyntheticTripsConfig::validate() const {
  auto check_mix = [](const auto& mix, const std::string& what) {
    if (mix.empty()) throw InvalidConfig(what + " is empty");
    double sum = 0.0;
    for (const auto& [key, share] : mix) {
      if (share < 0.0) throw InvalidConfig(what + " has a negative share");
      sum += share;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw InvalidConfig(what + " shares sum to " + std::to_string(sum) + ", expected 1");
  };
  check_mix(purpose_mix, "purpose mix");
  check_mix(income_mix, "income mix");
  if (service_area_fraction < 0.0 || service_area_fraction > 1.0)
    throw InvalidConfig("service area fraction outside [0, 1]");
  if (!(auto_time_median_min > 0.0) || !(auto_time_sigma > 0.0))
    throw InvalidConfig("auto time distribution parameters must be positive");
  if (!(speed_kmh > 0.0) || speed_jitter_sigma < 0.0)
    throw InvalidConfig("speed parameters invalid");
  if (utility_noise_sigma < 0.0) throw InvalidConfig("negative utility noise");
  if (!mode_constants.count("metro"))
    throw InvalidConfig("mode constants must include the reference mode 'metro'");
  if (mode_constants.size() < 2) throw InvalidConfig("need at least two modes");
}

std::vector<Trip> generate_synthetic_trips(std::uint64_t seed, std::size_t count,
                                           const SyntheticTripsConfig& config) {
  if (count == 0) throw InvalidConfig("trip count must be positive");
  config.validate();

  Rng rng(seed);
  std::vector<Trip> trips;
  trips.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Trip trip;
    trip.id = static_cast<long long>(i + 1);
    trip.purpose = pick(config.purpose_mix, rng.uniform());
    trip.income_group = pick(config.income_mix, rng.uniform());
    trip.in_service_area = rng.uniform() < config.service_area_fraction;
    trip.auto_time_min =
        std::max(4.0, config.auto_time_median_min *
                          std::exp(config.auto_time_sigma * rng.normal()));
    double speed =
        std::max(8.0, config.speed_kmh * std::exp(config.speed_jitter_sigma * rng.normal()));
    trip.distance_km = std::max(0.5, trip.auto_time_min / 60.0 * speed);

    const double transit_fare = std::min(3.8, 1.6 + 0.16 * trip.distance_km);
    std::map<ModeId, double> time_min, cost_eur;
    std::map<ModeId, bool> available;
    for (const auto& [mode, asc] : config.mode_constants) {
      available[mode] = true;
      if (mode == "walk") {
        time_min[mode] = trip.distance_km / 5.0 * 60.0;
        cost_eur[mode] = 0.0;
        available[mode] = trip.distance_km <= config.walk_max_km;
      } else if (mode == "bicycle") {
        time_min[mode] = trip.distance_km / 15.0 * 60.0;
        cost_eur[mode] = 0.0;
      } else if (mode == "autoDriver") {
        time_min[mode] = trip.auto_time_min + 4.0;
        cost_eur[mode] = 0.25 * trip.distance_km + 2.5;
      } else if (mode == "autoPassenger") {
        time_min[mode] = trip.auto_time_min;
        cost_eur[mode] = 0.10 * trip.distance_km;
      } else if (mode == "bus") {
        time_min[mode] = trip.auto_time_min * 1.7 + 6.0;
        cost_eur[mode] = transit_fare;
      } else if (mode == "metro") {
        time_min[mode] = trip.auto_time_min * 1.35 + 8.0;
        cost_eur[mode] = transit_fare;
      } else if (mode == "train") {
        time_min[mode] = trip.auto_time_min * 1.15 + 14.0;
        cost_eur[mode] = transit_fare * 1.2;
        available[mode] = trip.distance_km >= config.train_min_km;
      } else {
        // Unknown extra mode: treat like a generic motorized mode.
        time_min[mode] = trip.auto_time_min * 1.5 + 5.0;
        cost_eur[mode] = transit_fare;
      }
    }

    for (const auto& [mode, asc] : config.mode_constants) {
      double noise = config.utility_noise_sigma * rng.normal();
      if (!available[mode]) {
        trip.base_utilities.set_unavailable(mode);
        continue;
      }
      trip.base_utilities.set(mode, asc + config.beta_time * time_min[mode] +
                                        config.beta_cost * cost_eur[mode] + noise);
    }
    trip.metro_time_min = time_min.at("metro");
    trip.metro_cost_eur = cost_eur.at("metro");
    trips.push_back(std::move(trip));
  }
  return trips;
}

NestedLogitModel standard_synthetic_model(double transit_nc, double auto_nc,
                                          double beta_gc_metro) {
  NestedLogitModel model;
  model.modes = {"walk", "bicycle", "autoDriver", "autoPassenger", "bus", "metro", "train"};
  model.nests = {{"walk", {"walk"}, 1.0},
                 {"bicycle", {"bicycle"}, 1.0},
                 {"auto", {"autoDriver", "autoPassenger"}, auto_nc},
                 {"transit", {"bus", "metro", "train"}, transit_nc}};
  model.reference_mode = "metro";
  model.coefficients["beta_gc_metro"] = beta_gc_metro;
  model.validate();
  return model;
}

}  // namespace modeshift
