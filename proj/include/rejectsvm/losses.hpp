#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rsvm {

// Cost triple for classification with a reject option: rejecting costs d,
// a wrong decision costs 1, the surrogate hinge has slope a = (1-d)/d on the
// negative axis and |f| <= tau withholds a decision.
class CostParams {
 public:
  // tau defaults to 1/2 clipped to [d, 1-d].
  explicit CostParams(double d);
  CostParams(double d, double tau);

  double d() const noexcept { return d_; }
  double a() const noexcept { return a_; }
  double tau() const noexcept { return tau_; }

  // Re-validates a stored slope against d (used when loading models).
  void check_slope(double a) const;

 private:
  double d_;
  double a_;
  double tau_;
};

// Rejection cost and threshold used when scoring decisions. Unlike
// CostParams it admits tau = 0, which is how a plain sign classifier is scored.
struct DecisionRule {
  double d;
  double tau;

  static DecisionRule from(const CostParams& cp) { return {cp.d(), cp.tau()}; }
};

// Generalized hinge: 1 - a z (z < 0), 1 - z (0 <= z < 1), 0 otherwise.
double gen_hinge(double z, double a);
double gen_hinge(double z, const CostParams& cp);

// 1 if z < -tau, d if |z| <= tau, 0 otherwise.
double reject_loss(double z, const DecisionRule& rule);
double reject_loss(double z, const CostParams& cp);

// Lipschitz ramps sandwiching the misclassification and reject indicators.
// Both throw ParameterError for gamma <= 0.
double ramp_upper(double z, double tau, double gamma);
double ramp_reject(double z, double tau, double gamma);

// -1 if eta < d, 0 if d <= eta <= 1-d, +1 if eta > 1-d.
int bayes_rule(double eta, const CostParams& cp);
int bayes_rule(double eta, double d);

// Finite-support law of (X, eta(X)).
struct Atom {
  std::vector<double> x;
  double p;
  double eta;
};

struct DiscreteDistribution {
  std::vector<Atom> atoms;

  // Throws ParameterError unless probabilities are positive, sum to 1
  // within 1e-12 and every eta lies in [0,1]; StructuralError on ragged x.
  void validate() const;
  std::size_t dim() const { return atoms.empty() ? 0 : atoms.front().x.size(); }
};

using MarginLoss = std::function<double(double)>;

// sum_x p(x) [eta(x) loss(f(x)) + (1 - eta(x)) loss(-f(x))].
double population_risk(const DiscreteDistribution& dist, std::span<const double> f_at_atoms, const MarginLoss& loss);

// E[min(eta, 1-eta, d)].
double bayes_risk(const DiscreteDistribution& dist, const CostParams& cp);

// f0 evaluated at every atom.
std::vector<double> bayes_values(const DiscreteDistribution& dist, const CostParams& cp);

}  // namespace rsvm
