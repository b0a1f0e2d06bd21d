#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modeshift/errors.hpp"

namespace modeshift {

// Census target shares per control variable. Shares of one variable sum to 1.
struct MarginTable {
  std::map<std::string, std::map<std::string, double>> targets;  // variable -> category -> share

  void validate() const;  // shares >= 0, per-variable sums within 1e-9 of 1
};

struct RespondentRecord {
  std::string id;
  std::map<std::string, std::string> categories;  // control variable -> category
};

using WeightVector = std::map<std::string, double>;  // respondent id -> weight

struct IpfOptions {
  double tolerance = 1e-6;  // max absolute share residual
  int max_iterations = 1000;  // full raking sweeps
  std::optional<double> weight_cap;  // off by default; Table-1-sized weights are legitimate
  std::optional<WeightVector> initial_weights;  // warm restart; default all 1
};

struct IpfReport {
  bool converged = false;
  int iterations = 0;
  double max_residual = 0.0;
};

struct IpfResult {
  WeightVector weights;
  IpfReport report;
};

// Classical raking: multiplicative share updates per control variable,
// round-robin over variables, total weight renormalized to the sample size
// after every sweep. Throws EmptyCell when a positive-target category has no
// respondent; non-convergence is flagged in the report, never thrown.
IpfResult ipf(const std::vector<RespondentRecord>& records, const MarginTable& margins,
              const IpfOptions& options = {});

// Weighted category shares of one control variable. Shares sum to 1.
std::map<std::string, double> weighted_shares(const std::vector<RespondentRecord>& records,
                                              const WeightVector& weights,
                                              const std::string& variable);

// Pearson correlation between the stacked weighted shares and the stacked
// census shares, over the sorted (variable, category) universe.
double margin_correlation(
    const std::map<std::string, std::map<std::string, double>>& weighted,
    const MarginTable& margins);

}  // namespace modeshift
