#pragma once

#include <map>
#include <string>
#include <tuple>
#include <utility>

#include "modeshift/choice.hpp"
#include "modeshift/errors.hpp"

namespace modeshift {

inline const ModeId kRideHailing = "rideHailing";

// Conditional ride-hailing share inside the transit nest. AsPrinted omits
// the new mode from its own denominator; Normalized adds it so within-nest
// shares sum to 1.
enum class Eq3Variant { Normalized, AsPrinted };

Eq3Variant eq3_variant_from_string(const std::string& s);
std::string to_string(Eq3Variant v);

// Value of time in EUR/hr by income group and purpose: one table for the new
// mode, one for the calibrated base modes (keyed additionally by mode class).
// Keys are pre-expanded to the exact (group, purpose) pairs the trip
// population uses, so lookups never need fallback logic.
struct VotTable {
  std::map<std::pair<std::string, std::string>, double> ride_hailing;
  std::map<std::tuple<std::string, std::string, std::string>, double> base;

  double rh_vot(const std::string& income_group, const std::string& purpose) const;
  double base_vot(const std::string& mode_class, const std::string& income_group,
                  const std::string& purpose) const;
  void validate() const;  // all entries > 0
};

struct NewModeParams {
  double time_sensitivity_ratio = 1.0;  // delta_time_rh / delta_time_metro
  double fare_per_km = 1.5;             // EUR/km
  double beta_gc_metro = -0.05;         // utility per generalized-cost minute, negative
  double nesting_coefficient = 1.0;     // transit nest nc, must match the base model
  Eq3Variant variant = Eq3Variant::Normalized;

  void validate() const;
};

// Travel time plus money cost expressed in equivalent in-vehicle minutes.
// Money converts at VOT/60 EUR per minute.
struct GeneralizedCost {
  double minutes = 0.0;
  double time_minutes = 0.0;
  double money_minutes = 0.0;
};

// (beta_time / beta_cost) * 60, in EUR/hr. Throws ZeroCostCoefficient.
double vot(double beta_time, double beta_cost);

GeneralizedCost generalized_cost(double time_min, double money_eur, double vot_eur_per_hr);

// Ride-hailing generalized cost: scaled time plus distance-based fare
// converted through the traveler's ride-hailing VOT.
GeneralizedCost generalized_cost_rh(double time_rh_min, double distance_km,
                                    const NewModeParams& params, double vot_rh_eur_per_hr);

// Pivot utility: the reference mode's utility shifted by the generalized-cost
// difference.
double utility_rh(double u_metro, double beta_gc_metro, double gc_rh_min, double gc_metro_min);

// Conditional share of ride-hailing within the transit nest, metro as the
// reference utility.
double prob_rh_within_transit(double u_rh, double u_metro, double u_bus, double u_train,
                              double nc, Eq3Variant variant);

// Pivoted transit-nest probability. top_level holds the base model's
// composite utility per top-level alternative, including the transit nest's
// own base logsum; an unchanged logsum reproduces p_transit_base exactly.
double prob_transit_new(double new_transit_logsum, const UtilityVector& top_level,
                        double p_transit_base);

struct RhTripContext {
  double time_rh_min = 0.0;   // tt_factor * base auto time + waiting time
  double distance_km = 0.0;
  double gc_metro_min = 0.0;  // metro generalized cost in equivalent minutes
  std::string income_group;
  std::string purpose;
  bool in_service_area = true;
};

struct InjectionResult {
  std::map<ModeId, double> probabilities;  // includes kRideHailing
  double mass_deviation = 0.0;  // sum of probabilities - 1; reported, never normalized away
  double p_transit_base = 0.0;
  double p_transit_new = 0.0;
  double gc_rh_min = 0.0;
  double u_rh = 0.0;
};

// Full incremental injection: generalized cost, pivot utility, new transit
// logsum, pivoted nest probability, within-nest split, and proportional
// rescaling of the untouched alternatives. Out-of-service-area trips return
// the base distribution with a zero ride-hailing share.
InjectionResult inject_rh(const NestedLogitModel& base_model,
                          const UtilityVector& base_utilities, const RhTripContext& trip,
                          const NewModeParams& params, const VotTable& vots);

}  // namespace modeshift
