#include "modeshift/estimate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace modeshift {

void ModelSpec::validate() const {
  if (alternatives.empty()) throw InvalidConfig("model spec declares no alternatives");
  std::set<std::string> alts(alternatives.begin(), alternatives.end());
  if (alts.size() != alternatives.size())
    throw InvalidConfig("duplicate alternative in model spec");
  if (!alts.count(reference_alternative))
    throw InvalidConfig("reference alternative '" + reference_alternative +
                        "' is not in the alternative set");
  std::set<std::string> names;
  for (const auto& term : terms) {
    if (!names.insert(term.name).second)
      throw InvalidConfig("duplicate coefficient name '" + term.name + "'");
    if (term.alternatives.empty())
      throw InvalidConfig("term '" + term.name + "' applies to no alternative");
    for (const auto& alt : term.alternatives) {
      if (!alts.count(alt))
        throw InvalidConfig("term '" + term.name + "' references unknown alternative '" +
                            alt + "'");
      if (term.kind == SpecTerm::Kind::Constant && alt == reference_alternative)
        throw InvalidConfig("constant '" + term.name +
                            "' applies to the reference alternative; its constant is fixed to 0");
    }
    if (term.kind == SpecTerm::Kind::Attribute && term.attribute.empty())
      throw InvalidConfig("attribute term '" + term.name + "' names no attribute");
    if (term.kind == SpecTerm::Kind::Socio && term.socio.empty())
      throw InvalidConfig("socio term '" + term.name + "' names no variable");
  }
}

double EstimationResult::coefficient(const std::string& name) const {
  for (std::size_t i = 0; i < coefficient_names.size(); ++i)
    if (coefficient_names[i] == name) return beta[i];
  throw UnknownVariable("no coefficient named '" + name + "'");
}

namespace {

// Flattened design tensor: x[(n * n_alts + j) * n_terms + k].
struct Design {
  std::size_t n_obs = 0;
  std::size_t n_alts = 0;
  std::size_t n_terms = 0;
  std::vector<double> x;
  std::vector<int> chosen;
  std::vector<double> weight;

  const double* row(std::size_t n, std::size_t j) const {
    return x.data() + (n * n_alts + j) * n_terms;
  }
};

double socio_value(const ChoiceObservation& obs, const std::string& variable,
                   const std::string& term_name) {
  auto it = obs.sociodemographics.find(variable);
  if (it == obs.sociodemographics.end())
    throw MissingAttribute("sociodemographic '" + variable + "' required by term '" +
                           term_name + "' is missing (respondent " + obs.respondent_id + ")");
  return it->second;
}

double attribute_value(const ChoiceObservation& obs, const std::string& alternative,
                       const std::string& attribute, const std::string& term_name) {
  auto ait = obs.alternative_attributes.find(alternative);
  if (ait == obs.alternative_attributes.end() || !ait->second.count(attribute))
    throw MissingAttribute("attribute '" + attribute + "' of alternative '" + alternative +
                           "' required by term '" + term_name + "' is missing (respondent " +
                           obs.respondent_id + ")");
  return ait->second.at(attribute);
}

Design build_design(const std::vector<ChoiceObservation>& data, const ModelSpec& spec) {
  spec.validate();
  if (data.empty()) throw Error("no choice observations");

  Design d;
  d.n_obs = data.size();
  d.n_alts = spec.alternatives.size();
  d.n_terms = spec.terms.size();
  d.x.assign(d.n_obs * d.n_alts * d.n_terms, 0.0);
  d.chosen.resize(d.n_obs);
  d.weight.resize(d.n_obs);

  for (std::size_t n = 0; n < d.n_obs; ++n) {
    const auto& obs = data[n];
    if (!(obs.weight > 0.0))
      throw Error("non-positive weight for respondent '" + obs.respondent_id + "'");
    d.weight[n] = obs.weight;

    auto it = std::find(spec.alternatives.begin(), spec.alternatives.end(), obs.chosen);
    if (it == spec.alternatives.end())
      throw Error("chosen alternative '" + obs.chosen + "' of respondent '" +
                  obs.respondent_id + "' is not in the alternative set");
    d.chosen[n] = static_cast<int>(it - spec.alternatives.begin());

    for (std::size_t k = 0; k < d.n_terms; ++k) {
      const auto& term = spec.terms[k];
      for (const auto& alt : term.alternatives) {
        auto jt = std::find(spec.alternatives.begin(), spec.alternatives.end(), alt);
        std::size_t j = static_cast<std::size_t>(jt - spec.alternatives.begin());
        double value = 0.0;
        switch (term.kind) {
          case SpecTerm::Kind::Constant:
            value = 1.0;
            break;
          case SpecTerm::Kind::Socio:
            value = socio_value(obs, term.socio, term.name);
            break;
          case SpecTerm::Kind::Attribute:
            value = attribute_value(obs, alt, term.attribute, term.name);
            if (!term.socio.empty()) value *= socio_value(obs, term.socio, term.name);
            break;
        }
        d.x[(n * d.n_alts + j) * d.n_terms + k] = value;
      }
    }
  }
  return d;
}

struct Evaluation {
  double ll = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// One pass over the observations in index order; the fixed order keeps
// repeated evaluations bitwise identical.
Evaluation evaluate(const Design& d, const Eigen::VectorXd& beta, bool with_hessian) {
  const std::size_t k_dim = d.n_terms;
  Evaluation ev;
  ev.gradient = Eigen::VectorXd::Zero(k_dim);
  if (with_hessian) ev.hessian = Eigen::MatrixXd::Zero(k_dim, k_dim);

  Eigen::VectorXd v(d.n_alts), p(d.n_alts), xbar(k_dim), dev(k_dim);
  for (std::size_t n = 0; n < d.n_obs; ++n) {
    for (std::size_t j = 0; j < d.n_alts; ++j) {
      double vj = 0.0;
      const double* xj = d.row(n, j);
      for (std::size_t k = 0; k < k_dim; ++k) vj += xj[k] * beta[k];
      v[j] = vj;
    }
    double vmax = v.maxCoeff();
    double denom = 0.0;
    for (std::size_t j = 0; j < d.n_alts; ++j) {
      p[j] = std::exp(v[j] - vmax);
      denom += p[j];
    }
    p /= denom;

    const double w = d.weight[n];
    ev.ll += w * (v[d.chosen[n]] - vmax - std::log(denom));

    xbar.setZero();
    for (std::size_t j = 0; j < d.n_alts; ++j) {
      const double* xj = d.row(n, j);
      for (std::size_t k = 0; k < k_dim; ++k) xbar[k] += p[j] * xj[k];
    }
    const double* xc = d.row(n, static_cast<std::size_t>(d.chosen[n]));
    for (std::size_t k = 0; k < k_dim; ++k) ev.gradient[k] += w * (xc[k] - xbar[k]);

    if (with_hessian) {
      for (std::size_t j = 0; j < d.n_alts; ++j) {
        const double* xj = d.row(n, j);
        for (std::size_t k = 0; k < k_dim; ++k) dev[k] = xj[k] - xbar[k];
        ev.hessian.noalias() -= (w * p[j]) * (dev * dev.transpose());
      }
    }
  }
  return ev;
}

void check_identifiable(const std::vector<ChoiceObservation>& data, const ModelSpec& spec,
                        const Design& d) {
  // Constants shift whole groups of alternatives against each other. Group
  // the alternatives by their constant-term incidence; a group nobody ever
  // chooses sends some constant to infinity, so there is no finite MLE.
  std::vector<std::size_t> constant_terms;
  for (std::size_t k = 0; k < spec.terms.size(); ++k)
    if (spec.terms[k].kind == SpecTerm::Kind::Constant) constant_terms.push_back(k);
  if (!constant_terms.empty()) {
    std::map<std::vector<bool>, std::vector<std::string>> groups;
    for (const auto& alt : spec.alternatives) {
      std::vector<bool> signature;
      for (std::size_t k : constant_terms) {
        const auto& alts = spec.terms[k].alternatives;
        signature.push_back(std::find(alts.begin(), alts.end(), alt) != alts.end());
      }
      groups[signature].push_back(alt);
    }
    for (const auto& [signature, alts] : groups) {
      bool chosen = std::any_of(data.begin(), data.end(), [&](const auto& obs) {
        return std::find(alts.begin(), alts.end(), obs.chosen) != alts.end();
      });
      if (!chosen)
        throw Nonidentifiable("alternative '" + alts.front() +
                              "' is never chosen; the constants separating it are not "
                              "identified");
    }
  }
  if (d.n_terms == 0) return;

  Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(d.n_terms);
  Evaluation ev = evaluate(d, beta0, true);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(-ev.hessian);
  lu.setThreshold(1e-10);
  if (lu.rank() < static_cast<Eigen::Index>(d.n_terms)) {
    auto permutation = lu.permutationQ().indices();
    std::string name = spec.terms[permutation[lu.rank()]].name;
    throw Nonidentifiable("design matrix is rank deficient; coefficient '" + name +
                          "' is not identified");
  }
}

}  // namespace

LogLikelihoodValue log_likelihood(const std::vector<ChoiceObservation>& data,
                                  const ModelSpec& spec, const std::vector<double>& beta) {
  Design d = build_design(data, spec);
  if (beta.size() != d.n_terms)
    throw Error("beta has " + std::to_string(beta.size()) + " entries, spec has " +
                std::to_string(d.n_terms) + " terms");
  for (double b : beta)
    if (!std::isfinite(b)) throw Error("beta contains a non-finite entry");

  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
  Evaluation ev = evaluate(d, b, false);
  LogLikelihoodValue out;
  out.value = ev.ll;
  out.gradient.assign(ev.gradient.data(), ev.gradient.data() + ev.gradient.size());
  return out;
}

EstimationResult fit(const std::vector<ChoiceObservation>& data, const ModelSpec& spec,
                     const FitOptions& options) {
  Design d = build_design(data, spec);
  check_identifiable(data, spec, d);

  const std::size_t k_dim = d.n_terms;
  EstimationResult result;
  for (const auto& term : spec.terms) result.coefficient_names.push_back(term.name);
  result.n_observations = static_cast<long long>(d.n_obs);

  // Null log-likelihood.
  Evaluation null_ev = evaluate(d, Eigen::VectorXd::Zero(k_dim), false);
  if (options.null_model == NullModel::EqualShares || k_dim == 0) {
    result.null_log_likelihood = null_ev.ll;
  } else {
    ModelSpec constants_spec = spec;
    constants_spec.terms.clear();
    for (const auto& term : spec.terms)
      if (term.kind == SpecTerm::Kind::Constant) constants_spec.terms.push_back(term);
    if (constants_spec.terms.empty()) {
      result.null_log_likelihood = null_ev.ll;
    } else {
      FitOptions null_options = options;
      null_options.null_model = NullModel::EqualShares;
      result.null_log_likelihood = fit(data, constants_spec, null_options).log_likelihood;
    }
  }

  if (k_dim == 0) {
    result.log_likelihood = null_ev.ll;
    result.mcfadden_r2 = 0.0;
    result.converged = true;
    return result;
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k_dim);
  Evaluation ev = evaluate(d, beta, true);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    double scale = std::max(1.0, std::abs(ev.ll));
    if (ev.gradient.norm() <= options.gradient_tolerance * scale) {
      result.converged = true;
      break;
    }
    result.iterations = iter + 1;

    Eigen::VectorXd step;
    Eigen::LLT<Eigen::MatrixXd> llt(-ev.hessian);
    if (llt.info() == Eigen::Success) {
      step = llt.solve(ev.gradient);
    } else {
      step = ev.gradient;  // steepest ascent fallback
    }

    double lambda = 1.0;
    bool accepted = false;
    while (lambda >= 1e-12) {
      Eigen::VectorXd trial = beta + lambda * step;
      Evaluation trial_ev = evaluate(d, trial, true);
      if (std::isfinite(trial_ev.ll) && trial_ev.ll > ev.ll) {
        beta = trial;
        ev = std::move(trial_ev);
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;  // no ascent direction left; report best effort
  }

  double scale = std::max(1.0, std::abs(ev.ll));
  result.converged = ev.gradient.norm() <= options.gradient_tolerance * scale;
  result.gradient_norm = ev.gradient.norm();
  result.log_likelihood = ev.ll;
  result.beta.assign(beta.data(), beta.data() + beta.size());
  result.mcfadden_r2 = mcfadden_r2(result.log_likelihood, result.null_log_likelihood);

  // Standard errors from the inverse observed Hessian at the optimum.
  Eigen::MatrixXd info = -ev.hessian;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible())
    throw Nonidentifiable("observed information matrix is singular at the optimum");
  Eigen::MatrixXd covariance = lu.inverse();
  result.std_errors.resize(k_dim);
  for (std::size_t k = 0; k < k_dim; ++k)
    result.std_errors[k] = std::sqrt(std::max(0.0, covariance(k, k)));
  return result;
}

double mcfadden_r2(double ll, double ll0) {
  if (!(ll0 < 0.0))
    throw InvalidNull("null log-likelihood must be negative, got " + std::to_string(ll0));
  return 1.0 - ll / ll0;
}

}  // namespace modeshift
