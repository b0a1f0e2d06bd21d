#include "modeshift/newmode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace modeshift {

Eq3Variant eq3_variant_from_string(const std::string& s) {
  if (s == "normalized") return Eq3Variant::Normalized;
  if (s == "as-printed") return Eq3Variant::AsPrinted;
  throw InvalidConfig("unknown variant '" + s + "' (expected 'normalized' or 'as-printed')");
}

std::string to_string(Eq3Variant v) {
  return v == Eq3Variant::Normalized ? "normalized" : "as-printed";
}

double VotTable::rh_vot(const std::string& income_group, const std::string& purpose) const {
  auto it = ride_hailing.find({income_group, purpose});
  if (it == ride_hailing.end())
    throw InvalidConfig("no ride-hailing VOT for income group '" + income_group +
                        "', purpose '" + purpose + "'");
  return it->second;
}

double VotTable::base_vot(const std::string& mode_class, const std::string& income_group,
                          const std::string& purpose) const {
  auto it = base.find({mode_class, income_group, purpose});
  if (it == base.end())
    throw InvalidConfig("no base VOT for mode class '" + mode_class + "', income group '" +
                        income_group + "', purpose '" + purpose + "'");
  return it->second;
}

void VotTable::validate() const {
  for (const auto& [key, value] : ride_hailing)
    if (!(value > 0.0))
      throw InvalidConfig("non-positive ride-hailing VOT for income group '" + key.first +
                          "', purpose '" + key.second + "'");
  for (const auto& [key, value] : base)
    if (!(value > 0.0))
      throw InvalidConfig("non-positive base VOT for mode class '" + std::get<0>(key) + "'");
}

void NewModeParams::validate() const {
  if (!(time_sensitivity_ratio > 0.0))
    throw InvalidConfig("time sensitivity ratio must be positive");
  if (fare_per_km < 0.0) throw InvalidConfig("fare per km must be non-negative");
  if (!(beta_gc_metro < 0.0))
    throw InvalidConfig("generalized-cost coefficient must be negative");
  if (!(nesting_coefficient > 0.0 && nesting_coefficient <= 1.0))
    throw InvalidConfig("nesting coefficient outside (0, 1]");
}

double vot(double beta_time, double beta_cost) {
  if (beta_cost == 0.0) throw ZeroCostCoefficient("cost coefficient is zero");
  return beta_time / beta_cost * 60.0;
}

GeneralizedCost generalized_cost(double time_min, double money_eur, double vot_eur_per_hr) {
  if (!(vot_eur_per_hr > 0.0))
    throw NonpositiveVot("value of time must be positive, got " +
                         std::to_string(vot_eur_per_hr));
  if (time_min < 0.0) throw Error("negative travel time");
  if (money_eur < 0.0) throw Error("negative money cost");
  GeneralizedCost gc;
  gc.time_minutes = time_min;
  gc.money_minutes = money_eur / (vot_eur_per_hr / 60.0);
  gc.minutes = gc.time_minutes + gc.money_minutes;
  return gc;
}

GeneralizedCost generalized_cost_rh(double time_rh_min, double distance_km,
                                    const NewModeParams& params, double vot_rh_eur_per_hr) {
  if (!(vot_rh_eur_per_hr > 0.0))
    throw NonpositiveVot("ride-hailing value of time must be positive, got " +
                         std::to_string(vot_rh_eur_per_hr));
  if (time_rh_min < 0.0) throw Error("negative ride-hailing travel time");
  if (distance_km < 0.0) throw Error("negative ride-hailing distance");
  GeneralizedCost gc;
  gc.time_minutes = params.time_sensitivity_ratio * time_rh_min;
  gc.money_minutes = distance_km * params.fare_per_km / (vot_rh_eur_per_hr / 60.0);
  gc.minutes = gc.time_minutes + gc.money_minutes;
  return gc;
}

double utility_rh(double u_metro, double beta_gc_metro, double gc_rh_min,
                  double gc_metro_min) {
  return u_metro + beta_gc_metro * (gc_rh_min - gc_metro_min);
}

double prob_rh_within_transit(double u_rh, double u_metro, double u_bus, double u_train,
                              double nc, Eq3Variant variant) {
  if (!(nc > 0.0 && nc <= 1.0)) throw InvalidModel("nesting coefficient outside (0, 1]");
  double mx = std::max({u_rh, u_metro, u_bus, u_train});
  double num = std::exp((u_rh - mx) / nc);
  double denom = std::exp((u_bus - mx) / nc) + std::exp((u_train - mx) / nc) +
                 std::exp((u_metro - mx) / nc);
  if (variant == Eq3Variant::Normalized) denom += num;
  return num / denom;
}

double prob_transit_new(double new_transit_logsum, const UtilityVector& top_level,
                        double p_transit_base) {
  if (!(p_transit_base > 0.0 && p_transit_base < 1.0))
    throw DegenerateBase("base transit probability must lie in (0, 1), got " +
                         std::to_string(p_transit_base));
  if (!std::isfinite(new_transit_logsum)) throw Error("transit logsum is not finite");

  double mx = new_transit_logsum;
  for (const auto& [name, u] : top_level.entries())
    if (u.has_value()) mx = std::max(mx, *u);
  double denom = 0.0;
  std::size_t n = 0;
  for (const auto& [name, u] : top_level.entries()) {
    if (!u.has_value()) continue;
    denom += std::exp(*u - mx);
    ++n;
  }
  if (n == 0) throw NoAvailableMode("no top-level alternative");

  double q = std::exp(new_transit_logsum - mx) / denom;
  // Unchanged logsum reproduces the base probability without a rounding trip
  // through q / (q + 1 - q).
  if (q == p_transit_base) return p_transit_base;
  if (std::isinf(q)) return 1.0;  // dominance limit
  return q / (q + (1.0 - p_transit_base));
}

InjectionResult inject_rh(const NestedLogitModel& base_model,
                          const UtilityVector& base_utilities, const RhTripContext& trip,
                          const NewModeParams& params, const VotTable& vots) {
  params.validate();
  const NestSpec& transit_nest = base_model.nest_of(base_model.reference_mode);
  if (params.nesting_coefficient != transit_nest.nesting_coefficient)
    throw InvalidConfig("nesting coefficient " + std::to_string(params.nesting_coefficient) +
                        " does not match the transit nest's " +
                        std::to_string(transit_nest.nesting_coefficient));

  InjectionResult result;
  auto base_probs = nested_probabilities(base_model, base_utilities);

  if (!trip.in_service_area) {
    result.probabilities = base_probs;
    result.probabilities[kRideHailing] = 0.0;
    double sum = 0.0;
    for (const auto& [mode, p] : result.probabilities) sum += p;
    result.mass_deviation = sum - 1.0;
    auto composites = nest_composite_utilities(base_model, base_utilities);
    result.p_transit_base = top_level_probabilities(composites).at(transit_nest.name);
    result.p_transit_new = result.p_transit_base;
    return result;
  }

  if (!base_utilities.available(base_model.reference_mode))
    throw ReferenceModeUnavailable("reference mode '" + base_model.reference_mode +
                                   "' is unavailable for this trip");

  const double u_metro = base_utilities.at(base_model.reference_mode);
  const double vot_rh = vots.rh_vot(trip.income_group, trip.purpose);
  const GeneralizedCost gc_rh =
      generalized_cost_rh(trip.time_rh_min, trip.distance_km, params, vot_rh);
  const double u_rh =
      utility_rh(u_metro, params.beta_gc_metro, gc_rh.minutes, trip.gc_metro_min);
  result.gc_rh_min = gc_rh.minutes;
  result.u_rh = u_rh;

  auto composites = nest_composite_utilities(base_model, base_utilities);
  auto nest_probs = top_level_probabilities(composites);
  result.p_transit_base = nest_probs.at(transit_nest.name);

  // Transit-nest logsum recomputed with ride-hailing as an extra member.
  std::vector<double> members;
  for (const auto& m : transit_nest.members)
    if (base_utilities.available(m)) members.push_back(base_utilities.at(m));
  std::vector<double> members_with_rh = members;
  members_with_rh.push_back(u_rh);
  const double new_logsum = nest_logsum(members_with_rh, params.nesting_coefficient);

  UtilityVector top_level;
  for (const auto& [name, c] : composites) top_level.set(name, c);
  const double p_transit_new =
      prob_transit_new(new_logsum, top_level, result.p_transit_base);
  result.p_transit_new = p_transit_new;

  // Within-nest split. The normalized variant is a conditional logit over the
  // base members plus ride-hailing; as printed, the base members keep their
  // original conditional shares and ride-hailing's share rides on top.
  double mx = u_rh;
  for (double u : members) mx = std::max(mx, u);
  double base_denom = 0.0;
  for (double u : members) base_denom += std::exp((u - mx) / params.nesting_coefficient);
  const double rh_term = std::exp((u_rh - mx) / params.nesting_coefficient);
  const double denom = params.variant == Eq3Variant::Normalized ? base_denom + rh_term
                                                                : base_denom;

  for (const auto& [mode, p] : base_probs) {
    bool in_transit = std::find(transit_nest.members.begin(), transit_nest.members.end(),
                                mode) != transit_nest.members.end();
    if (in_transit) continue;
    // Untouched alternatives shrink proportionally with the transit gain.
    result.probabilities[mode] =
        p * (1.0 - p_transit_new) / (1.0 - result.p_transit_base);
  }
  for (const auto& m : transit_nest.members) {
    if (!base_utilities.available(m)) continue;
    double conditional =
        std::exp((base_utilities.at(m) - mx) / params.nesting_coefficient) / denom;
    result.probabilities[m] = conditional * p_transit_new;
  }
  result.probabilities[kRideHailing] = (rh_term / denom) * p_transit_new;

  double sum = 0.0;
  for (const auto& [mode, p] : result.probabilities) sum += p;
  result.mass_deviation = sum - 1.0;
  return result;
}

}  // namespace modeshift
