#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rejectsvm/losses.hpp"
#include "rejectsvm/matrix.hpp"
#include "rejectsvm/train.hpp"

namespace rsvm {

// 0 when |margin| <= tau, otherwise the sign of the margin.
int decide(double margin, double tau);

struct Prediction {
  double margin;
  int decision;
};

Prediction predict(const Model& model, std::span<const double> x);

struct RiskReport {
  double phi_risk = 0.0;
  double ell_risk = 0.0;
  double misclass_rate = 0.0;  // share with y f < -tau
  double reject_rate = 0.0;    // share with |f| <= tau
  std::optional<double> excess_ell;
  std::size_t n_eval = 0;
};

// Scores margins against labels. phi uses slope a; the reject loss uses rule.
// bayes, when given, fills excess_ell = ell_risk - bayes.
RiskReport risk_from_margins(std::span<const double> margins, std::span<const int> labels, double a,
                             const DecisionRule& rule, std::optional<double> bayes = std::nullopt);

// Scores the model on labeled rows with its own cost parameters, or with
// rule when given.
RiskReport risk_report(const Model& model, const Matrix& rows, std::span<const int> labels,
                       std::optional<DecisionRule> rule = std::nullopt, std::optional<double> bayes = std::nullopt);

// Width-gamma penalty level of the error-rate bounds:
//   C_F / gamma { 9 sqrt(2 log(2 max(M,n)) / n) + 2 p log2(n) / sqrt(2 max(M,n))
//                 + sqrt(2 log(1/delta) / n) }.
double rate_r(double gamma, std::size_t n, std::size_t m, double c_f, double delta, double p);

// 25 log-spaced widths on [0.02, 2].
std::vector<double> default_gamma_grid();

struct BoundTerm {
  double gamma = 0.0;     // minimizing width
  double empirical = 0.0; // share of training points inside the widened region
  double penalty = 0.0;   // rate_r(gamma) * ||lambda||_1
  double value = 0.0;     // empirical + penalty + n^-p
};

struct BoundReport {
  BoundTerm misclass;  // bounds P{Y f <= -tau}
  BoundTerm reject;    // bounds P{|f| <= tau}
  double tail = 0.0;   // n^-p
  double l1 = 0.0;
  double delta = 0.05;
  double p = 1.0;
};

// Grid minimum over gamma of P_n{Y f <= -tau + gamma} + rate_r(gamma) ||lambda||_1
// plus n^-p, and the analogue with |f| <= tau + gamma. Throws ParameterError
// for an empty grid, a non-positive width, or delta outside (0, 1).
BoundReport bounds_from_margins(std::span<const double> margins, std::span<const int> labels, double l1, double tau,
                                std::size_t m, double c_f, std::span<const double> gamma_grid, double delta = 0.05,
                                double p = 1.0);

// The same on the model's training rows, using the C_F stored in the model.
BoundReport bounds(const Model& model, const Matrix& rows, std::span<const int> labels,
                   std::span<const double> gamma_grid, double delta = 0.05, double p = 1.0);

}  // namespace rsvm
