#include "rejectsvm/train.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rejectsvm/constants.hpp"
#include "rejectsvm/errors.hpp"
#include "rejectsvm/rng.hpp"

namespace rsvm {

double Model::margin(std::span<const double> x) const { return dot(lambda, dict.eval(x)); }

std::vector<double> Model::margins(const Matrix& rows) const {
  std::vector<double> out(rows.rows());
  std::vector<double> basis(dict.size());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    dict.eval(rows.row(i), basis);
    out[i] = dot(lambda, basis);
  }
  return out;
}

double Model::l1() const { return l1_norm(lambda); }

std::size_t Model::support_size() const {
  return static_cast<std::size_t>(
      std::count_if(lambda.begin(), lambda.end(), [](double v) { return std::abs(v) > tol::kSupport; }));
}

namespace {

void check_training_inputs(const DesignMatrix& phi, double r) {
  if (phi.n() == 0 || phi.m() == 0) throw StructuralError("training needs n >= 1 rows and M >= 1 columns");
  if (!phi.labeled()) throw StructuralError("training data has no labels");
  phi.validate();
  if (!(r >= 0.0) || !std::isfinite(r)) throw ParameterError(fmt::format("penalty r={} must be >= 0", r));
}

// Adds the two |lambda_j| rows for variables lambda at [0, m) and t at t_offset.
void add_abs_rows(lp::LinearProgram& lp, std::size_t m, std::size_t t_offset) {
  const std::size_t nvar = lp.num_variables();
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> upper(nvar, 0.0);
    upper[t_offset + j] = 1.0;
    upper[j] = -1.0;
    lp.add(std::move(upper), lp::Relation::kGreaterEqual, 0.0);
    std::vector<double> lower(nvar, 0.0);
    lower[t_offset + j] = 1.0;
    lower[j] = 1.0;
    lp.add(std::move(lower), lp::Relation::kGreaterEqual, 0.0);
  }
}

// Weighted generalized-hinge fit
//   min sum_i w_i phi(y_i <lambda, x_i>) + r ||lambda||_1
// solved through its LP dual
//   max sum_i (u_i + v_i)  s.t.  u_i + v_i <= w_i,  |g_j| <= r,  u, v >= 0,
//   g_j = sum_i y_i x_ij (u_i + a v_i),
// which starts feasible at the slack basis. lambda_j is recovered as the
// difference of the duals on the -g_j <= r and g_j <= r rows.
FitResult solve_weighted_hinge(const Matrix& rows, std::span<const double> labels, std::span<const double> weights,
                               double a, double r, const lp::SolveOptions& options = {}) {
  const std::size_t k = rows.rows();
  const std::size_t m = rows.cols();
  lp::LinearProgram dual(2 * k);
  std::fill(dual.objective.begin(), dual.objective.end(), -1.0);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> coeffs(2 * k, 0.0);
    coeffs[i] = 1.0;
    coeffs[k + i] = 1.0;
    dual.add(std::move(coeffs), lp::Relation::kLessEqual, weights[i]);
  }
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> g(2 * k);
    for (std::size_t i = 0; i < k; ++i) {
      g[i] = labels[i] * rows(i, j);
      g[k + i] = a * g[i];
    }
    std::vector<double> neg(g.size());
    std::transform(g.begin(), g.end(), neg.begin(), [](double v) { return -v; });
    dual.add(std::move(g), lp::Relation::kLessEqual, r);
    dual.add(std::move(neg), lp::Relation::kLessEqual, r);
  }

  const lp::LpSolution sol = lp::solve_lp(dual, options);
  if (sol.status != lp::Status::kOptimal) {
    throw NumericalFailure(fmt::format("training LP dual returned status '{}'", lp::to_string(sol.status)));
  }
  FitResult fr;
  fr.lambda.resize(m);
  for (std::size_t j = 0; j < m; ++j) fr.lambda[j] = sol.duals[k + 2 * j + 1] - sol.duals[k + 2 * j];
  fr.objective = -sol.objective_value;
  fr.iterations = sol.iterations;
  return fr;
}

}  // namespace

lp::LinearProgram assemble_lp(const DesignMatrix& phi, const CostParams& cp, double r) {
  check_training_inputs(phi, r);
  const std::size_t n = phi.n();
  const std::size_t m = phi.m();
  const std::size_t xi0 = m;
  const std::size_t t0 = m + n;

  lp::LinearProgram lp(m + n + m);
  for (std::size_t j = 0; j < m; ++j) lp.bounds[j] = lp::Bound::free();
  const double weight = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) lp.objective[xi0 + i] = weight;
  for (std::size_t j = 0; j < m; ++j) lp.objective[t0 + j] = r;

  for (std::size_t i = 0; i < n; ++i) {
    const auto row = phi.phi.row(i);
    const double y = phi.labels[i];
    for (double slope : {1.0, cp.a()}) {
      std::vector<double> coeffs(lp.num_variables(), 0.0);
      for (std::size_t j = 0; j < m; ++j) coeffs[j] = slope * y * row[j];
      coeffs[xi0 + i] = 1.0;
      lp.add(std::move(coeffs), lp::Relation::kGreaterEqual, 1.0);
    }
  }
  add_abs_rows(lp, m, t0);
  return lp;
}

FitResult fit_coefficients(const DesignMatrix& phi, const CostParams& cp, double r, const lp::SolveOptions& options) {
  check_training_inputs(phi, r);
  const std::vector<double> labels(phi.labels.begin(), phi.labels.end());
  const std::vector<double> weights(phi.n(), 1.0 / static_cast<double>(phi.n()));
  return solve_weighted_hinge(phi.phi, labels, weights, cp.a(), r, options);
}

Model fit(const Dictionary& dict, const DesignMatrix& phi, const CostParams& cp, double r,
          const lp::SolveOptions& options) {
  if (dict.size() != phi.m()) throw StructuralError("design matrix does not match the dictionary");
  FitResult fr = fit_coefficients(phi, cp, r, options);
  return Model{std::move(fr.lambda), dict.with_estimated_sup_norm(phi), cp, r, {phi.n(), fr.objective, fr.iterations}};
}

double empirical_phi_risk(const DesignMatrix& phi, const CostParams& cp, std::span<const double> lambda) {
  if (lambda.size() != phi.m()) throw StructuralError("coefficient vector does not match the design matrix");
  double total = 0.0;
  for (std::size_t i = 0; i < phi.n(); ++i) total += gen_hinge(phi.labels[i] * dot(phi.phi.row(i), lambda), cp);
  return total / static_cast<double>(phi.n());
}

double penalized_objective(const DesignMatrix& phi, const CostParams& cp, double r, std::span<const double> lambda) {
  return empirical_phi_risk(phi, cp, lambda) + r * l1_norm(lambda);
}

std::vector<double> atom_margins(const DiscreteDistribution& dist, const Dictionary& dict,
                                 std::span<const double> lambda) {
  if (lambda.size() != dict.size()) throw StructuralError("coefficient vector does not match the dictionary");
  std::vector<double> f;
  f.reserve(dist.atoms.size());
  for (const Atom& atom : dist.atoms) f.push_back(dot(lambda, dict.eval(atom.x)));
  return f;
}

lp::LinearProgram assemble_population_lp(const DiscreteDistribution& dist, const Dictionary& dict,
                                         const CostParams& cp, double r) {
  dist.validate();
  if (!(r >= 0.0) || !std::isfinite(r)) throw ParameterError(fmt::format("penalty r={} must be >= 0", r));
  const std::size_t k = dist.atoms.size();
  const std::size_t m = dict.size();
  const std::size_t xi0 = m;
  const std::size_t t0 = m + 2 * k;

  lp::LinearProgram lp(m + 2 * k + m);
  for (std::size_t j = 0; j < m; ++j) lp.bounds[j] = lp::Bound::free();
  for (std::size_t j = 0; j < m; ++j) lp.objective[t0 + j] = r;

  for (std::size_t s = 0; s < k; ++s) {
    const Atom& atom = dist.atoms[s];
    const std::vector<double> basis = dict.eval(atom.x);
    lp.objective[xi0 + 2 * s] = atom.p * atom.eta;
    lp.objective[xi0 + 2 * s + 1] = atom.p * (1.0 - atom.eta);
    for (int side = 0; side < 2; ++side) {
      const double y = side == 0 ? 1.0 : -1.0;
      for (double slope : {1.0, cp.a()}) {
        std::vector<double> coeffs(lp.num_variables(), 0.0);
        for (std::size_t j = 0; j < m; ++j) coeffs[j] = slope * y * basis[j];
        coeffs[xi0 + 2 * s + static_cast<std::size_t>(side)] = 1.0;
        lp.add(std::move(coeffs), lp::Relation::kGreaterEqual, 1.0);
      }
    }
  }
  add_abs_rows(lp, m, t0);
  return lp;
}

Model fit_population(const DiscreteDistribution& dist, const Dictionary& dict, const CostParams& cp, double r) {
  dist.validate();
  if (!(r >= 0.0) || !std::isfinite(r)) throw ParameterError(fmt::format("penalty r={} must be >= 0", r));
  Matrix rows(2 * dist.atoms.size(), dict.size());
  std::vector<double> labels;
  std::vector<double> weights;
  for (std::size_t s = 0; s < dist.atoms.size(); ++s) {
    const Atom& atom = dist.atoms[s];
    dict.eval(atom.x, rows.row(2 * s));
    dict.eval(atom.x, rows.row(2 * s + 1));
    labels.insert(labels.end(), {1.0, -1.0});
    weights.insert(weights.end(), {atom.p * atom.eta, atom.p * (1.0 - atom.eta)});
  }
  FitResult fr = solve_weighted_hinge(rows, labels, weights, cp.a(), r);
  return Model{std::move(fr.lambda), dict, cp, r, {dist.atoms.size(), fr.objective, fr.iterations}};
}

CvResult cross_validate(const DesignMatrix& phi, const CostParams& cp, std::span<const double> r_grid,
                        std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ParameterError("cross-validation needs at least 2 folds");
  if (folds > phi.n()) throw ParameterError(fmt::format("{} folds for {} rows", folds, phi.n()));
  if (r_grid.empty()) throw ParameterError("empty r grid");
  for (double r : r_grid) {
    if (!(r > 0.0)) throw ParameterError("r grid entries must be positive");
  }

  std::vector<std::size_t> order(phi.n());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> fold_of(phi.n());
  for (std::size_t pos = 0; pos < order.size(); ++pos) fold_of[order[pos]] = pos % folds;

  struct Split {
    DesignMatrix train;
    std::vector<std::size_t> held_out;
  };
  std::vector<Split> splits(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    Split& s = splits[f];
    for (std::size_t i = 0; i < phi.n(); ++i) {
      if (fold_of[i] == f) {
        s.held_out.push_back(i);
      } else {
        s.train.phi.append_row(phi.phi.row(i));
        s.train.labels.push_back(phi.labels[i]);
      }
    }
  }

  CvResult result{r_grid.front(), {}};
  double best = std::numeric_limits<double>::infinity();
  for (double r : r_grid) {
    double pooled = 0.0;
    std::vector<double> fold_risk(folds);
    for (std::size_t f = 0; f < folds; ++f) {
      const FitResult fr = fit_coefficients(splits[f].train, cp, r);
      double loss = 0.0;
      for (std::size_t i : splits[f].held_out) {
        loss += reject_loss(phi.labels[i] * dot(phi.phi.row(i), fr.lambda), cp);
      }
      pooled += loss;
      fold_risk[f] = loss / static_cast<double>(splits[f].held_out.size());
    }
    const double mean = pooled / static_cast<double>(phi.n());
    const double fold_mean = std::accumulate(fold_risk.begin(), fold_risk.end(), 0.0) / static_cast<double>(folds);
    double ss = 0.0;
    for (double v : fold_risk) ss += (v - fold_mean) * (v - fold_mean);
    const double se = std::sqrt(ss / static_cast<double>(folds - 1) / static_cast<double>(folds));
    result.table.push_back({r, mean, se});
    if (mean < best || (mean == best && r > result.best_r)) {
      best = mean;
      result.best_r = r;
    }
  }
  return result;
}

double deviation_bracket(std::size_t n, std::size_t m, double delta, double p) {
  if (n == 0 || m == 0) throw ParameterError("n and M must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError(fmt::format("delta={} outside (0,1)", delta));
  if (!(p >= 1.0)) throw ParameterError(fmt::format("p={} must be >= 1", p));
  const double nn = static_cast<double>(n);
  const double big = static_cast<double>(std::max(m, n));
  const double complexity = 9.0 * std::sqrt(2.0 * std::log(2.0 * big) / nn);
  const double peeling = 2.0 * p * std::log2(nn) / std::sqrt(2.0 * big);
  const double confidence = std::sqrt(2.0 * std::log(1.0 / delta) / nn);
  return complexity + peeling + confidence;
}

double theoretical_r(std::size_t n, std::size_t m, double c_f, const CostParams& cp, double delta, double p) {
  return cp.a() * c_f * deviation_bracket(n, m, delta, p);
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi >= lo) || count == 0) throw ParameterError("log grid needs 0 < lo <= hi and count >= 1");
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) grid[k] = lo * std::exp(step * static_cast<double>(k));
  grid.back() = hi;
  return grid;
}

std::vector<double> default_r_grid(double a, double c_f, std::size_t count) {
  return log_grid(1e-4, std::max(a * c_f, 1e-3), count);
}

}  // namespace rsvm
