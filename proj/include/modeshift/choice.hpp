#pragma once

#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "modeshift/errors.hpp"

namespace modeshift {

using ModeId = std::string;

// Systematic utilities keyed by mode. A mode can be marked unavailable; it is
// then excluded from every numerator and denominator instead of carrying a
// sentinel utility.
class UtilityVector {
public:
  UtilityVector() = default;
  UtilityVector(std::initializer_list<std::pair<const ModeId, double>> utilities);

  void set(const ModeId& mode, double utility);
  void set_unavailable(const ModeId& mode);

  bool contains(const ModeId& mode) const;
  bool available(const ModeId& mode) const;
  // Utility of an available mode; throws NoAvailableMode when the mode is
  // absent or unavailable.
  double at(const ModeId& mode) const;

  std::vector<ModeId> available_modes() const;  // sorted by mode id
  std::size_t available_count() const;

  const std::map<ModeId, std::optional<double>>& entries() const { return entries_; }

private:
  std::map<ModeId, std::optional<double>> entries_;
};

struct NestSpec {
  std::string name;
  std::vector<ModeId> members;
  double nesting_coefficient = 1.0;  // in (0, 1]; 1 for degenerate single-mode nests
};

// Two-level nested logit structure. Deeper trees are rejected at load time;
// here a nest is always a flat list of modes.
struct NestedLogitModel {
  std::vector<ModeId> modes;
  std::vector<NestSpec> nests;
  ModeId reference_mode;  // pivot reference inside the transit nest, e.g. metro
  std::map<std::string, double> coefficients;  // calibrated scalars by name

  // Unique mode ids, every mode in exactly one nest, nesting coefficients in
  // (0, 1], reference mode present. Throws InvalidModel.
  void validate() const;

  const NestSpec& nest_of(const ModeId& mode) const;
  const NestSpec& nest_named(const std::string& name) const;
};

// Multinomial logit probabilities over the available modes, computed with
// max-subtraction so extreme utilities stay finite.
std::map<ModeId, double> mnl_probabilities(const UtilityVector& u);

// nc * ln(sum(exp(u/nc))) over the given member utilities.
double nest_logsum(const std::vector<double>& member_utilities, double nc);

// Same, over the available modes of a nest-shaped utility vector.
double nest_logsum(const UtilityVector& members, double nc);

// Two-level nested logit: P(mode) = P(nest) * P(mode | nest). Nests with no
// available member drop out of the top level.
std::map<ModeId, double> nested_probabilities(const NestedLogitModel& model,
                                              const UtilityVector& u);

// Composite (logsum) utility per nest with at least one available member,
// keyed by nest name. This is the top level of the nested model; exposed
// because the incremental pivot needs the same quantities.
std::map<std::string, double> nest_composite_utilities(const NestedLogitModel& model,
                                                       const UtilityVector& u);

// MNL over composite utilities; key order (sorted map) fixes the summation
// order so repeated evaluations are bitwise identical.
std::map<std::string, double> top_level_probabilities(
    const std::map<std::string, double>& composites);

}  // namespace modeshift
