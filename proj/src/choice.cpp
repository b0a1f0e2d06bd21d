#include "modeshift/choice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace modeshift {

UtilityVector::UtilityVector(
    std::initializer_list<std::pair<const ModeId, double>> utilities) {
  for (const auto& [mode, u] : utilities) entries_[mode] = u;
}

void UtilityVector::set(const ModeId& mode, double utility) {
  if (!std::isfinite(utility))
    throw Error("utility for mode '" + mode + "' is not finite");
  entries_[mode] = utility;
}

void UtilityVector::set_unavailable(const ModeId& mode) { entries_[mode] = std::nullopt; }

bool UtilityVector::contains(const ModeId& mode) const { return entries_.count(mode) > 0; }

bool UtilityVector::available(const ModeId& mode) const {
  auto it = entries_.find(mode);
  return it != entries_.end() && it->second.has_value();
}

double UtilityVector::at(const ModeId& mode) const {
  auto it = entries_.find(mode);
  if (it == entries_.end() || !it->second.has_value())
    throw NoAvailableMode("mode '" + mode + "' is not available");
  return *it->second;
}

std::vector<ModeId> UtilityVector::available_modes() const {
  std::vector<ModeId> out;
  for (const auto& [mode, u] : entries_)
    if (u.has_value()) out.push_back(mode);
  return out;
}

std::size_t UtilityVector::available_count() const {
  std::size_t n = 0;
  for (const auto& [mode, u] : entries_)
    if (u.has_value()) ++n;
  return n;
}

void NestedLogitModel::validate() const {
  if (modes.empty()) throw InvalidModel("model declares no modes");
  std::set<ModeId> seen;
  for (const auto& m : modes)
    if (!seen.insert(m).second) throw InvalidModel("duplicate mode id '" + m + "'");

  std::set<std::string> nest_names;
  std::map<ModeId, int> membership;
  for (const auto& nest : nests) {
    if (!nest_names.insert(nest.name).second)
      throw InvalidModel("duplicate nest name '" + nest.name + "'");
    if (nest.members.empty())
      throw InvalidModel("nest '" + nest.name + "' has no members");
    if (!(nest.nesting_coefficient > 0.0 && nest.nesting_coefficient <= 1.0))
      throw InvalidModel("nest '" + nest.name + "' has nesting coefficient outside (0, 1]");
    if (nest.members.size() == 1 && nest.nesting_coefficient != 1.0)
      throw InvalidModel("degenerate nest '" + nest.name + "' must have nesting coefficient 1");
    for (const auto& m : nest.members) {
      if (!seen.count(m))
        throw InvalidModel("nest '" + nest.name + "' references unknown mode '" + m + "'");
      membership[m] += 1;
    }
  }
  for (const auto& m : modes) {
    auto it = membership.find(m);
    if (it == membership.end())
      throw InvalidModel("mode '" + m + "' belongs to no nest");
    if (it->second != 1)
      throw InvalidModel("mode '" + m + "' belongs to more than one nest");
  }
  if (!seen.count(reference_mode))
    throw InvalidModel("reference mode '" + reference_mode + "' is not a model mode");
}

const NestSpec& NestedLogitModel::nest_of(const ModeId& mode) const {
  for (const auto& nest : nests)
    for (const auto& m : nest.members)
      if (m == mode) return nest;
  throw InvalidModel("mode '" + mode + "' belongs to no nest");
}

const NestSpec& NestedLogitModel::nest_named(const std::string& name) const {
  for (const auto& nest : nests)
    if (nest.name == name) return nest;
  throw InvalidModel("no nest named '" + name + "'");
}

std::map<ModeId, double> mnl_probabilities(const UtilityVector& u) {
  double max_u = -std::numeric_limits<double>::infinity();
  std::size_t n = 0;
  for (const auto& [mode, util] : u.entries()) {
    if (!util.has_value()) continue;
    max_u = std::max(max_u, *util);
    ++n;
  }
  if (n == 0) throw NoAvailableMode("no available mode");

  std::map<ModeId, double> probs;
  double denom = 0.0;
  for (const auto& [mode, util] : u.entries()) {
    if (!util.has_value()) continue;
    double e = std::exp(*util - max_u);
    probs[mode] = e;
    denom += e;
  }
  for (auto& [mode, p] : probs) p /= denom;
  return probs;
}

double nest_logsum(const std::vector<double>& member_utilities, double nc) {
  if (member_utilities.empty()) throw EmptyNest("logsum over empty member set");
  if (!(nc > 0.0 && nc <= 1.0))
    throw InvalidModel("nesting coefficient outside (0, 1]");
  double max_u = *std::max_element(member_utilities.begin(), member_utilities.end());
  double sum = 0.0;
  for (double u : member_utilities) sum += std::exp((u - max_u) / nc);
  return max_u + nc * std::log(sum);
}

double nest_logsum(const UtilityVector& members, double nc) {
  std::vector<double> utilities;
  for (const auto& [mode, u] : members.entries())
    if (u.has_value()) utilities.push_back(*u);
  if (utilities.empty()) throw EmptyNest("logsum over nest with no available member");
  return nest_logsum(utilities, nc);
}

std::map<std::string, double> nest_composite_utilities(const NestedLogitModel& model,
                                                       const UtilityVector& u) {
  // Modes outside the model are a contract violation, not an empty choice set.
  for (const auto& [mode, util] : u.entries()) {
    if (!util.has_value()) continue;
    model.nest_of(mode);
  }
  std::map<std::string, double> composites;
  for (const auto& nest : model.nests) {
    std::vector<double> member_utilities;
    for (const auto& m : nest.members)
      if (u.available(m)) member_utilities.push_back(u.at(m));
    if (member_utilities.empty()) continue;  // nest drops out of the top level
    composites[nest.name] = nest_logsum(member_utilities, nest.nesting_coefficient);
  }
  if (composites.empty()) throw NoAvailableMode("no available mode in any nest");
  return composites;
}

std::map<std::string, double> top_level_probabilities(
    const std::map<std::string, double>& composites) {
  if (composites.empty()) throw NoAvailableMode("no nest with available members");
  double max_u = -std::numeric_limits<double>::infinity();
  for (const auto& [name, c] : composites) max_u = std::max(max_u, c);
  std::map<std::string, double> probs;
  double denom = 0.0;
  for (const auto& [name, c] : composites) {
    double e = std::exp(c - max_u);
    probs[name] = e;
    denom += e;
  }
  for (auto& [name, p] : probs) p /= denom;
  return probs;
}

std::map<ModeId, double> nested_probabilities(const NestedLogitModel& model,
                                              const UtilityVector& u) {
  auto composites = nest_composite_utilities(model, u);
  auto nest_probs = top_level_probabilities(composites);

  std::map<ModeId, double> probs;
  for (const auto& nest : model.nests) {
    auto np = nest_probs.find(nest.name);
    if (np == nest_probs.end()) continue;

    double max_u = -std::numeric_limits<double>::infinity();
    for (const auto& m : nest.members)
      if (u.available(m)) max_u = std::max(max_u, u.at(m));
    double denom = 0.0;
    for (const auto& m : nest.members)
      if (u.available(m)) denom += std::exp((u.at(m) - max_u) / nest.nesting_coefficient);
    for (const auto& m : nest.members) {
      if (!u.available(m)) continue;
      double conditional =
          std::exp((u.at(m) - max_u) / nest.nesting_coefficient) / denom;
      probs[m] = np->second * conditional;
    }
  }
  return probs;
}

}  // namespace modeshift
