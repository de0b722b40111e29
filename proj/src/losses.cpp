#include "rejectsvm/losses.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "rejectsvm/errors.hpp"

namespace rsvm {

namespace {

double default_tau(double d) { return std::clamp(0.5, d, 1.0 - d); }

void require_finite(double z) {
  if (std::isnan(z)) throw ParameterError("margin is NaN");
}

}  // namespace

CostParams::CostParams(double d) : CostParams(d, default_tau(d)) {}

CostParams::CostParams(double d, double tau) : d_(d), a_(0.0), tau_(tau) {
  if (!(d > 0.0 && d <= 0.5)) throw ParameterError(fmt::format("rejection cost d={} outside (0, 1/2]", d));
  if (!(tau >= d && tau <= 1.0 - d)) {
    throw ParameterError(fmt::format("threshold tau={} outside [d, 1-d] = [{}, {}]", tau, d, 1.0 - d));
  }
  a_ = (1.0 - d) / d;
}

void CostParams::check_slope(double a) const {
  if (!(std::abs(a - a_) <= 1e-12 * a_)) {
    throw ParameterError(fmt::format("slope a={} inconsistent with d={} (expected {})", a, d_, a_));
  }
}

double gen_hinge(double z, double a) {
  require_finite(z);
  if (z < 0.0) return 1.0 - a * z;
  if (z < 1.0) return 1.0 - z;
  return 0.0;
}

double gen_hinge(double z, const CostParams& cp) { return gen_hinge(z, cp.a()); }

double reject_loss(double z, const DecisionRule& rule) {
  require_finite(z);
  if (z < -rule.tau) return 1.0;
  if (z <= rule.tau) return rule.d;
  return 0.0;
}

double reject_loss(double z, const CostParams& cp) { return reject_loss(z, DecisionRule::from(cp)); }

double ramp_upper(double z, double tau, double gamma) {
  if (!(gamma > 0.0)) throw ParameterError(fmt::format("ramp width gamma={} must be positive", gamma));
  if (z < -tau) return 1.0;
  if (z <= -tau + gamma) return (gamma - tau - z) / gamma;
  return 0.0;
}

double ramp_reject(double z, double tau, double gamma) {
  if (!(gamma > 0.0)) throw ParameterError(fmt::format("ramp width gamma={} must be positive", gamma));
  const double u = std::abs(z);
  if (u < tau) return 1.0;
  if (u <= tau + gamma) return (tau + gamma - u) / gamma;
  return 0.0;
}

int bayes_rule(double eta, double d) {
  if (eta < d) return -1;
  if (eta > 1.0 - d) return 1;
  return 0;
}

int bayes_rule(double eta, const CostParams& cp) { return bayes_rule(eta, cp.d()); }

void DiscreteDistribution::validate() const {
  if (atoms.empty()) throw ParameterError("distribution has no atoms");
  double total = 0.0;
  const std::size_t dimension = atoms.front().x.size();
  for (const Atom& atom : atoms) {
    if (atom.x.size() != dimension) throw StructuralError("atoms have differing feature dimensions");
    if (!(atom.p > 0.0)) throw ParameterError("atom probability must be positive");
    if (!(atom.eta >= 0.0 && atom.eta <= 1.0)) throw ParameterError("atom eta outside [0,1]");
    total += atom.p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError(fmt::format("atom probabilities sum to {:.17g}", total));
}

double population_risk(const DiscreteDistribution& dist, std::span<const double> f_at_atoms, const MarginLoss& loss) {
  if (f_at_atoms.size() != dist.atoms.size()) throw StructuralError("one function value per atom is required");
  double risk = 0.0;
  for (std::size_t k = 0; k < dist.atoms.size(); ++k) {
    const Atom& atom = dist.atoms[k];
    const double f = f_at_atoms[k];
    risk += atom.p * (atom.eta * loss(f) + (1.0 - atom.eta) * loss(-f));
  }
  return risk;
}

double bayes_risk(const DiscreteDistribution& dist, const CostParams& cp) {
  double risk = 0.0;
  for (const Atom& atom : dist.atoms) risk += atom.p * std::min({atom.eta, 1.0 - atom.eta, cp.d()});
  return risk;
}

std::vector<double> bayes_values(const DiscreteDistribution& dist, const CostParams& cp) {
  std::vector<double> f0;
  f0.reserve(dist.atoms.size());
  for (const Atom& atom : dist.atoms) f0.push_back(bayes_rule(atom.eta, cp));
  return f0;
}

}  // namespace rsvm
