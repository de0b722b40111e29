#include "rejectsvm/evaluate.hpp"

#include <fmt/format.h>

#include <cmath>

#include "rejectsvm/errors.hpp"

namespace rsvm {

int decide(double margin, double tau) {
  if (std::abs(margin) <= tau) return 0;
  return margin > 0.0 ? 1 : -1;
}

Prediction predict(const Model& model, std::span<const double> x) {
  if (x.size() != model.dict.input_dim()) {
    throw StructuralError(fmt::format("input has {} features, model expects {}", x.size(), model.dict.input_dim()));
  }
  const double f = model.margin(x);
  return {f, decide(f, model.cp.tau())};
}

RiskReport risk_from_margins(std::span<const double> margins, std::span<const int> labels, double a,
                             const DecisionRule& rule, std::optional<double> bayes) {
  if (margins.empty()) throw DataError("risk evaluation needs at least one row");
  if (margins.size() != labels.size()) throw StructuralError("margin and label counts differ");
  std::size_t wrong = 0;
  std::size_t rejected = 0;
  double phi = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    const double z = labels[i] * margins[i];
    phi += gen_hinge(z, a);
    if (std::abs(z) <= rule.tau) {
      ++rejected;
    } else if (z < -rule.tau) {
      ++wrong;
    }
  }
  const double n = static_cast<double>(margins.size());
  RiskReport rep;
  rep.n_eval = margins.size();
  rep.phi_risk = phi / n;
  rep.misclass_rate = static_cast<double>(wrong) / n;
  rep.reject_rate = static_cast<double>(rejected) / n;
  rep.ell_risk = rep.misclass_rate + rule.d * rep.reject_rate;
  if (bayes) rep.excess_ell = rep.ell_risk - *bayes;
  return rep;
}

RiskReport risk_report(const Model& model, const Matrix& rows, std::span<const int> labels,
                       std::optional<DecisionRule> rule, std::optional<double> bayes) {
  if (rows.rows() > 0 && rows.cols() != model.dict.input_dim()) {
    throw StructuralError(fmt::format("data has {} features, model expects {}", rows.cols(), model.dict.input_dim()));
  }
  const std::vector<double> f = model.margins(rows);
  return risk_from_margins(f, labels, model.cp.a(), rule.value_or(DecisionRule::from(model.cp)), bayes);
}

double rate_r(double gamma, std::size_t n, std::size_t m, double c_f, double delta, double p) {
  if (!(gamma > 0.0)) throw ParameterError(fmt::format("ramp width gamma={} must be > 0", gamma));
  return c_f / gamma * deviation_bracket(n, m, delta, p);
}

std::vector<double> default_gamma_grid() { return log_grid(0.02, 2.0, 25); }

BoundReport bounds_from_margins(std::span<const double> margins, std::span<const int> labels, double l1, double tau,
                                std::size_t m, double c_f, std::span<const double> gamma_grid, double delta,
                                double p) {
  if (gamma_grid.empty()) throw ParameterError("gamma grid is empty");
  if (margins.empty()) throw DataError("bounds need at least one training row");
  if (margins.size() != labels.size()) throw StructuralError("margin and label counts differ");
  const std::size_t n = margins.size();
  const double nn = static_cast<double>(n);

  BoundReport rep;
  rep.tail = std::pow(nn, -p);
  rep.l1 = l1;
  rep.delta = delta;
  rep.p = p;
  bool first = true;
  for (double gamma : gamma_grid) {
    const double penalty = rate_r(gamma, n, m, c_f, delta, p) * l1;
    std::size_t wrong = 0;
    std::size_t close = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] * margins[i] <= -tau + gamma) ++wrong;
      if (std::abs(margins[i]) <= tau + gamma) ++close;
    }
    const BoundTerm mis{gamma, wrong / nn, penalty, wrong / nn + penalty + rep.tail};
    const BoundTerm rej{gamma, close / nn, penalty, close / nn + penalty + rep.tail};
    if (first || mis.value < rep.misclass.value) rep.misclass = mis;
    if (first || rej.value < rep.reject.value) rep.reject = rej;
    first = false;
  }
  return rep;
}

BoundReport bounds(const Model& model, const Matrix& rows, std::span<const int> labels,
                   std::span<const double> gamma_grid, double delta, double p) {
  if (rows.rows() > 0 && rows.cols() != model.dict.input_dim()) {
    throw StructuralError(fmt::format("data has {} features, model expects {}", rows.cols(), model.dict.input_dim()));
  }
  const std::vector<double> f = model.margins(rows);
  return bounds_from_margins(f, labels, model.l1(), model.cp.tau(), model.dict.size(), model.dict.sup_norm().value,
                             gamma_grid, delta, p);
}

}  // namespace rsvm
