#pragma once

#include <map>
#include <string>
#include <vector>

#include "modeshift/errors.hpp"

namespace modeshift {

// One respondent x scenario record in wide format: every alternative's
// attributes live on the same row.
struct ChoiceObservation {
  std::string respondent_id;
  std::string purpose;  // HBW | HBO
  std::string scenario_id;
  std::map<std::string, std::map<std::string, double>> alternative_attributes;
  std::map<std::string, double> sociodemographics;  // numeric-coded
  std::string chosen;
  double weight = 1.0;
};

struct SpecTerm {
  enum class Kind { Constant, Attribute, Socio };

  std::string name;
  Kind kind = Kind::Attribute;
  std::string attribute;      // Attribute terms: attribute name
  std::string socio;          // Socio terms: variable; Attribute terms: optional interaction
  std::vector<std::string> alternatives;  // alternatives the term applies to
};

struct ModelSpec {
  std::vector<std::string> alternatives;
  std::string reference_alternative;  // its constant is fixed to 0
  std::vector<SpecTerm> terms;

  // Unique coefficient names, known alternatives, no constant on the
  // reference alternative. Throws InvalidConfig.
  void validate() const;
};

struct LogLikelihoodValue {
  double value = 0.0;
  std::vector<double> gradient;  // aligned with spec.terms
};

// Weighted log-likelihood sum(w * ln P(chosen)) and its analytic score.
// Throws MissingAttribute naming the offending attribute/alternative pair.
LogLikelihoodValue log_likelihood(const std::vector<ChoiceObservation>& data,
                                  const ModelSpec& spec, const std::vector<double>& beta);

enum class NullModel {
  EqualShares,    // LL at beta = 0
  ConstantsOnly,  // LL of a constants-only fit
};

struct FitOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;  // scaled by max(1, |LL|)
  NullModel null_model = NullModel::EqualShares;
};

struct EstimationResult {
  std::vector<std::string> coefficient_names;
  std::vector<double> beta;
  std::vector<double> std_errors;
  double log_likelihood = 0.0;
  double null_log_likelihood = 0.0;
  double mcfadden_r2 = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  long long n_observations = 0;

  double coefficient(const std::string& name) const;  // throws UnknownVariable
};

// Newton-Raphson on the analytic gradient and Hessian with step-halving,
// steepest-ascent fallback when the Hessian step is unusable. The MNL
// likelihood is globally concave, so the optimum is unique when identified.
// Throws Nonidentifiable for rank-deficient designs or never-chosen
// alternatives carrying a free constant.
EstimationResult fit(const std::vector<ChoiceObservation>& data, const ModelSpec& spec,
                     const FitOptions& options = {});

// 1 - LL/LL0. Throws InvalidNull when LL0 >= 0.
double mcfadden_r2(double ll, double ll0);

}  // namespace modeshift
