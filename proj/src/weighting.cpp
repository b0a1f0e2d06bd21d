#include "modeshift/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace modeshift {

void MarginTable::validate() const {
  if (targets.empty()) throw Error("margin table has no control variables");
  for (const auto& [variable, categories] : targets) {
    if (categories.empty())
      throw Error("control variable '" + variable + "' has no categories");
    double sum = 0.0;
    for (const auto& [category, share] : categories) {
      if (share < 0.0)
        throw Error("negative target share for " + variable + "/" + category);
      sum += share;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error("target shares of '" + variable + "' sum to " + std::to_string(sum) +
                  ", expected 1");
  }
}

namespace {

// Residual = max over (variable, category) of |weighted share - target share|.
double max_share_residual(const std::vector<RespondentRecord>& records,
                          const std::vector<double>& weights, const MarginTable& margins) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double worst = 0.0;
  for (const auto& [variable, categories] : margins.targets) {
    std::map<std::string, double> weighted;
    for (std::size_t i = 0; i < records.size(); ++i)
      weighted[records[i].categories.at(variable)] += weights[i];
    for (const auto& [category, target] : categories) {
      double share = weighted.count(category) ? weighted.at(category) / total : 0.0;
      worst = std::max(worst, std::abs(share - target));
    }
  }
  return worst;
}

}  // namespace

IpfResult ipf(const std::vector<RespondentRecord>& records, const MarginTable& margins,
              const IpfOptions& options) {
  margins.validate();
  if (records.empty()) throw Error("no respondent records");
  if (!(options.tolerance > 0.0)) throw Error("ipf tolerance must be positive");
  if (options.max_iterations < 1) throw Error("ipf max_iterations must be >= 1");

  // Every record must be fully categorized within the margin universe; the
  // ingestion step is responsible for dropping anything else.
  for (const auto& rec : records) {
    for (const auto& [variable, categories] : margins.targets) {
      auto it = rec.categories.find(variable);
      if (it == rec.categories.end())
        throw Error("respondent '" + rec.id + "' has no category for '" + variable + "'");
      if (!categories.count(it->second))
        throw Error("respondent '" + rec.id + "' has unknown category '" + it->second +
                    "' for '" + variable + "'");
    }
  }
  for (const auto& [variable, categories] : margins.targets) {
    for (const auto& [category, target] : categories) {
      if (target <= 0.0) continue;
      bool populated = std::any_of(records.begin(), records.end(), [&](const auto& rec) {
        return rec.categories.at(variable) == category;
      });
      if (!populated)
        throw EmptyCell("no respondent in category '" + category + "' of '" + variable +
                        "' (target share " + std::to_string(target) + ")");
    }
  }

  const double n = static_cast<double>(records.size());
  std::vector<double> weights(records.size(), 1.0);
  if (options.initial_weights) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      auto it = options.initial_weights->find(records[i].id);
      if (it == options.initial_weights->end())
        throw Error("initial weights missing respondent '" + records[i].id + "'");
      if (!(it->second > 0.0))
        throw Error("non-positive initial weight for respondent '" + records[i].id + "'");
      weights[i] = it->second;
    }
  }

  IpfReport report;
  report.max_residual = max_share_residual(records, weights, margins);
  for (int sweep = 1; sweep <= options.max_iterations; ++sweep) {
    for (const auto& [variable, categories] : margins.targets) {
      std::map<std::string, double> weighted;
      double total = 0.0;
      for (std::size_t i = 0; i < records.size(); ++i) {
        weighted[records[i].categories.at(variable)] += weights[i];
        total += weights[i];
      }
      std::map<std::string, double> factor;
      for (const auto& [category, target] : categories) {
        auto it = weighted.find(category);
        if (it == weighted.end() || it->second <= 0.0) continue;  // zero-target cells
        factor[category] = target * total / it->second;
      }
      for (std::size_t i = 0; i < records.size(); ++i) {
        auto it = factor.find(records[i].categories.at(variable));
        if (it != factor.end()) weights[i] *= it->second;
      }
    }
    // Raking to shares preserves the total weight up to rounding; pin it to n.
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w *= n / total;
    // The cap is a hard bound on returned weights, so it comes last; capped
    // runs trade away exact total preservation.
    if (options.weight_cap)
      for (double& w : weights) w = std::min(w, *options.weight_cap);

    report.iterations = sweep;
    report.max_residual = max_share_residual(records, weights, margins);
    if (report.max_residual <= options.tolerance) {
      report.converged = true;
      break;
    }
  }

  IpfResult result;
  result.report = report;
  for (std::size_t i = 0; i < records.size(); ++i) result.weights[records[i].id] = weights[i];
  return result;
}

std::map<std::string, double> weighted_shares(const std::vector<RespondentRecord>& records,
                                              const WeightVector& weights,
                                              const std::string& variable) {
  if (records.empty()) throw Error("no respondent records");
  std::map<std::string, double> sums;
  double total = 0.0;
  bool found = false;
  for (const auto& rec : records) {
    auto wit = weights.find(rec.id);
    if (wit == weights.end())
      throw Error("no weight for respondent '" + rec.id + "'");
    auto cit = rec.categories.find(variable);
    if (cit == rec.categories.end()) continue;
    found = true;
    sums[cit->second] += wit->second;
    total += wit->second;
  }
  if (!found) throw UnknownVariable("no respondent carries variable '" + variable + "'");
  for (auto& [category, share] : sums) share /= total;
  return sums;
}

double margin_correlation(
    const std::map<std::string, std::map<std::string, double>>& weighted,
    const MarginTable& margins) {
  std::vector<double> xs, ys;
  for (const auto& [variable, categories] : margins.targets) {
    auto wit = weighted.find(variable);
    if (wit == weighted.end())
      throw UnknownVariable("weighted shares missing variable '" + variable + "'");
    for (const auto& [category, target] : categories) {
      auto cit = wit->second.find(category);
      // A category can be absent from the sample only with target 0.
      xs.push_back(cit == wit->second.end() ? 0.0 : cit->second);
      ys.push_back(target);
    }
  }
  if (xs.size() < 2) throw DegenerateVariance("fewer than two categories to correlate");

  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw DegenerateVariance("share vector is constant, correlation undefined");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace modeshift
