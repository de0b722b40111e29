#include "rejectsvm/theory_lab.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "rejectsvm/constants.hpp"
#include "rejectsvm/errors.hpp"
#include "rejectsvm/rng.hpp"
#include "rejectsvm/train.hpp"

namespace rsvm {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr double kLpTolerance = 1e-7;

Matrix atom_features(const DiscreteDistribution& dist, const Dictionary& dict) {
  if (dist.dim() != dict.input_dim()) {
    throw StructuralError(fmt::format("atoms have dimension {}, dictionary expects {}", dist.dim(), dict.input_dim()));
  }
  Matrix out(dist.atoms.size(), dict.size());
  for (std::size_t s = 0; s < dist.atoms.size(); ++s) dict.eval(dist.atoms[s].x, out.row(s));
  return out;
}

double phi_risk_at(const DiscreteDistribution& dist, std::span<const double> f, const CostParams& cp) {
  return population_risk(dist, f, [&](double z) { return gen_hinge(z, cp); });
}

std::string join(std::span<const double> v) {
  return fmt::format("[{:.6g}]", fmt::join(v, " "));
}

double ratio(const Eigen::MatrixXd& psi, const Eigen::VectorXd& delta, const std::vector<std::size_t>& support) {
  double in = 0.0;
  for (std::size_t j : support) in += delta(static_cast<Eigen::Index>(j)) * delta(static_cast<Eigen::Index>(j));
  if (in <= 0.0) return kInfinity;
  return delta.dot(psi * delta) / (4.0 * in);
}

// Shrinks the off-support part so that delta lies in the cone.
void project_to_cone(Eigen::VectorXd& delta, const std::vector<bool>& on_support, double c) {
  double in = 0.0;
  double out = 0.0;
  for (Eigen::Index j = 0; j < delta.size(); ++j) {
    (on_support[static_cast<std::size_t>(j)] ? in : out) += std::abs(delta(j));
  }
  if (out <= c * in) return;
  const double scale = c * in / out;
  for (Eigen::Index j = 0; j < delta.size(); ++j) {
    if (!on_support[static_cast<std::size_t>(j)]) delta(j) *= scale;
  }
}

}  // namespace

Matrix gram_psi(const DiscreteDistribution& dist, const Dictionary& dict) {
  dist.validate();
  const Matrix feats = atom_features(dist, dict);
  const std::size_t m = dict.size();
  Matrix psi(m, m);
  for (std::size_t s = 0; s < dist.atoms.size(); ++s) {
    const Atom& atom = dist.atoms[s];
    const double w = 4.0 * atom.p * atom.eta * (1.0 - atom.eta);
    if (w == 0.0) continue;
    const auto f = feats.row(s);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i; j < m; ++j) psi(i, j) += w * f[i] * f[j];
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < i; ++j) psi(i, j) = psi(j, i);
  }
  return psi;
}

double weighted_norm(const DiscreteDistribution& dist, std::span<const double> g) {
  if (g.size() != dist.atoms.size()) throw StructuralError("one value per atom expected");
  double total = 0.0;
  for (std::size_t s = 0; s < g.size(); ++s) {
    const Atom& atom = dist.atoms[s];
    total += atom.p * g[s] * g[s] * atom.eta * (1.0 - atom.eta);
  }
  return std::sqrt(total);
}

KappaEstimate kappa_estimate(const Matrix& psi_in, std::span<const double> theta, double c, std::size_t budget,
                             std::uint64_t seed) {
  const std::size_t m = theta.size();
  if (psi_in.rows() != m || psi_in.cols() != m) throw StructuralError("Psi must be M x M with M = |theta|");
  if (!(c >= 1.0)) throw ParameterError(fmt::format("cone constant c={} must be >= 1", c));
  std::vector<std::size_t> support;
  std::vector<std::size_t> off;
  std::vector<bool> on_support(m, false);
  for (std::size_t j = 0; j < m; ++j) {
    if (std::abs(theta[j]) > tol::kSupport) {
      support.push_back(j);
      on_support[j] = true;
    } else {
      off.push_back(j);
    }
  }
  if (support.empty()) throw ParameterError("kappa needs theta != 0");

  const auto mm = static_cast<Eigen::Index>(m);
  const Eigen::MatrixXd psi = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      psi_in.data().data(), mm, mm);

  std::vector<std::pair<double, Eigen::VectorXd>> pool;
  {
    const auto k = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        sub(a, b) = psi(static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)]),
                        static_cast<Eigen::Index>(support[static_cast<std::size_t>(b)]));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(mm);
    for (Eigen::Index a = 0; a < k; ++a) {
      delta(static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)])) = eig.eigenvectors()(a, 0);
    }
    pool.emplace_back(ratio(psi, delta, support), delta);
  }

  Rng rng(seed);
  for (std::size_t trial = 0; trial < budget; ++trial) {
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(mm);
    double in = 0.0;
    for (std::size_t j : support) {
      delta(static_cast<Eigen::Index>(j)) = rng.normal();
      in += std::abs(delta(static_cast<Eigen::Index>(j)));
    }
    if (!off.empty()) {
      double out = 0.0;
      for (std::size_t j : off) {
        delta(static_cast<Eigen::Index>(j)) = rng.normal();
        out += std::abs(delta(static_cast<Eigen::Index>(j)));
      }
      const double target = rng.uniform() * c * in;
      for (std::size_t j : off) delta(static_cast<Eigen::Index>(j)) *= target / out;
    }
    pool.emplace_back(ratio(psi, delta, support), std::move(delta));
  }

  std::sort(pool.begin(), pool.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  pool.resize(std::min<std::size_t>(pool.size(), 8));
  for (auto& [best, delta] : pool) {
    double step = 0.5;
    for (int it = 0; it < 400 && step > 1e-8; ++it) {
      Eigen::VectorXd trial = delta;
      const double scale = step * delta.norm() / std::sqrt(static_cast<double>(m));
      for (Eigen::Index j = 0; j < mm; ++j) trial(j) += scale * rng.normal();
      project_to_cone(trial, on_support, c);
      const double value = ratio(psi, trial, support);
      if (value < best) {
        best = value;
        delta = trial / trial.norm();
        step *= 1.2;
      } else {
        step *= 0.95;
      }
    }
  }
  const auto winner =
      std::min_element(pool.begin(), pool.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  KappaEstimate est;
  est.kappa2 = std::max(winner->first, 0.0);
  est.delta.assign(winner->second.data(), winner->second.data() + winner->second.size());
  return est;
}

bool Complexity::infinite() const { return std::isinf(alpha); }

double near_boundary_mass(const DiscreteDistribution& dist, double d, double t) {
  double low = 0.0;
  double high = 0.0;
  for (const Atom& atom : dist.atoms) {
    if (std::abs(atom.eta - d) <= t) low += atom.p;
    if (std::abs(atom.eta - (1.0 - d)) <= t) high += atom.p;
  }
  return std::max(low, high);
}

double complexity_constant(const DiscreteDistribution& dist, double d, double alpha) {
  double a = 1.0;
  for (const Atom& atom : dist.atoms) {
    for (double t : {std::abs(atom.eta - d), std::abs(atom.eta - (1.0 - d))}) {
      const double mass = near_boundary_mass(dist, d, t);
      if (t == 0.0) {
        if (alpha > 0.0 && mass > 0.0) return kInfinity;
        continue;
      }
      a = std::max(a, mass / std::pow(t, alpha));
    }
  }
  return a;
}

Complexity complexity_estimate(const DiscreteDistribution& dist, double d, std::span<const double> t_grid) {
  if (t_grid.empty()) throw ParameterError("t grid is empty");
  for (double t : t_grid) {
    if (!(t > 0.0 && t <= 1.0)) throw ParameterError(fmt::format("t={} outside (0,1]", t));
  }
  Complexity cx;
  cx.gap = kInfinity;
  for (const Atom& atom : dist.atoms) cx.gap = std::min({cx.gap, std::abs(atom.eta - d), std::abs(atom.eta - (1.0 - d))});

  const double t_min = *std::min_element(t_grid.begin(), t_grid.end());
  if (near_boundary_mass(dist, d, t_min) == 0.0) {
    cx.alpha = kInfinity;
    cx.a_const = 1.0;
    return cx;
  }
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  double k = 0.0;
  for (double t : t_grid) {
    const double mass = near_boundary_mass(dist, d, t);
    if (mass <= 0.0) continue;
    const double x = std::log(t);
    const double y = std::log(mass);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    k += 1.0;
  }
  const double denom = k * sxx - sx * sx;
  cx.alpha = (k >= 2.0 && denom > 0.0) ? std::max(0.0, (k * sxy - sx * sy) / denom) : 0.0;
  cx.a_const = complexity_constant(dist, d, cx.alpha);
  return cx;
}

std::vector<double> default_t_grid() { return log_grid(1e-3, 0.2, 40); }

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::kPass:
      return "pass";
    case CheckStatus::kFail:
      return "fail";
    case CheckStatus::kSkipped:
      return "skipped";
  }
  return "unknown";
}

CheckRow check_psi(const Matrix& psi_in) {
  const auto m = static_cast<Eigen::Index>(psi_in.rows());
  if (psi_in.cols() != psi_in.rows()) throw StructuralError("Psi must be square");
  CheckRow row{"psi_psd", CheckStatus::kPass, 0.0, ""};
  if (m == 0) return row;
  const Eigen::MatrixXd psi = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      psi_in.data().data(), m, m);
  const double asym = (psi - psi.transpose()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(psi, Eigen::EigenvaluesOnly);
  row.slack = eig.eigenvalues()(0);
  row.witness = fmt::format("min_eigenvalue={:.6g} asymmetry={:.3g}", row.slack, asym);
  if (row.slack < -1e-9 || asym > 1e-12) row.status = CheckStatus::kFail;
  return row;
}

CheckRow check_lemma_a1(const DiscreteDistribution& dist, const Dictionary& dict, const CostParams& cp,
                        const Complexity& cx, std::span<const std::vector<double>> lambdas) {
  CheckRow row{"lemma_a1", CheckStatus::kPass, kInfinity, ""};
  if (cx.infinite() || cx.alpha <= 0.0 || std::isinf(cx.a_const)) {
    row.status = CheckStatus::kSkipped;
    row.slack = 0.0;
    row.witness = fmt::format("alpha={} A={}", cx.alpha, cx.a_const);
    return row;
  }
  dist.validate();
  const Matrix feats = atom_features(dist, dict);
  const std::vector<double> f0 = bayes_values(dist, cp);
  const double r0 = phi_risk_at(dist, f0, cp);
  const double alpha = cx.alpha;
  const double factor = 4.0 * cx.a_const * std::pow(2.0 * cp.d(), alpha);

  std::vector<double> f(dist.atoms.size());
  std::vector<double> g(dist.atoms.size());
  for (const auto& lambda : lambdas) {
    if (lambda.size() != dict.size()) throw StructuralError("coefficient vector does not match the dictionary");
    double sup = 0.0;
    for (std::size_t s = 0; s < f.size(); ++s) {
      f[s] = dot(feats.row(s), lambda);
      g[s] = f[s] - f0[s];
      sup = std::max(sup, std::abs(g[s]));
    }
    const double excess = std::max(0.0, phi_risk_at(dist, f, cp) - r0);
    const double lhs = std::pow(weighted_norm(dist, g), 2.0 + 2.0 * alpha);
    const double rhs = factor * std::pow(sup, 2.0 + alpha) * std::pow(excess, alpha);
    const double slack = rhs - lhs;
    const bool violated = lhs > rhs * (1.0 + 1e-9) + 1e-15;
    if (slack < row.slack || (violated && row.status != CheckStatus::kFail)) {
      row.slack = slack;
      row.witness = fmt::format("lambda={} lhs={:.6g} rhs={:.6g}", join(lambda), lhs, rhs);
    }
    if (violated) row.status = CheckStatus::kFail;
  }
  if (lambdas.empty()) row.slack = 0.0;
  return row;
}

CheckRow check_excess_domination(const DiscreteDistribution& dist, const CostParams& cp,
                                 std::span<const std::vector<double>> f_values) {
  if (cp.tau() < cp.d() || cp.tau() > 1.0 - cp.d()) {
    throw ParameterError(fmt::format("tau={} outside [d, 1-d]", cp.tau()));
  }
  dist.validate();
  const std::vector<double> f0 = bayes_values(dist, cp);
  const auto ell = [&](double z) { return reject_loss(z, cp); };
  const double ell0 = population_risk(dist, f0, ell);
  const double phi0 = phi_risk_at(dist, f0, cp);
  CheckRow row{"excess_domination", CheckStatus::kPass, kInfinity, ""};
  for (const auto& f : f_values) {
    const double d_ell = population_risk(dist, f, ell) - ell0;
    const double d_phi = phi_risk_at(dist, f, cp) - phi0;
    const double slack = d_phi - d_ell;
    if (slack < row.slack) {
      row.slack = slack;
      row.witness = fmt::format("f={} excess_ell={:.6g} excess_phi={:.6g}", join(f), d_ell, d_phi);
    }
    if (slack < -1e-12) row.status = CheckStatus::kFail;
  }
  if (f_values.empty()) row.slack = 0.0;
  return row;
}

std::vector<CheckRow> check_prop21(const DiscreteDistribution& dist, const Dictionary& dict, const CostParams& cp,
                                   std::span<const double> r_grid) {
  if (r_grid.empty()) throw ParameterError("r grid is empty");
  const Model base = fit_population(dist, dict, cp, 0.0);
  const std::vector<double>& l0 = base.lambda;
  const double norm0 = l1_norm(l0);
  const double risk0 = phi_risk_at(dist, atom_margins(dist, dict, l0), cp);

  CheckRow a{"prop21_a", CheckStatus::kPass, kInfinity, ""};
  CheckRow b{"prop21_b", CheckStatus::kPass, kInfinity, ""};
  CheckRow c{"prop21_c", CheckStatus::kPass, kInfinity, ""};
  double r_lo = kInfinity;
  double r_hi = -kInfinity;
  double gap_lo = 0.0;
  double gap_hi = 0.0;
  for (double r : r_grid) {
    const Model fit_r = fit_population(dist, dict, cp, r);
    const double gap = phi_risk_at(dist, atom_margins(dist, dict, fit_r.lambda), cp) - risk0;
    if (r < r_lo) {
      r_lo = r;
      gap_lo = gap;
    }
    if (r > r_hi) {
      r_hi = r;
      gap_hi = gap;
    }
    // 0 <= gap <= r ||lambda(0)||_1 drives the convergence claim.
    const double a_slack = std::min(r * norm0 - gap, gap) + kLpTolerance;
    if (a_slack < a.slack) {
      a.slack = a_slack;
      a.witness = fmt::format("r={:.6g} risk_gap={:.6g} r_l1_0={:.6g}", r, gap, r * norm0);
    }

    const double b_slack = norm0 - fit_r.l1() + kLpTolerance;
    if (b_slack < b.slack) {
      b.slack = b_slack;
      b.witness = fmt::format("r={:.6g} l1_r={:.6g} l1_0={:.6g}", r, fit_r.l1(), norm0);
    }

    double inside = 0.0;
    double outside = 0.0;
    for (std::size_t j = 0; j < l0.size(); ++j) {
      const double diff = std::abs(fit_r.lambda[j] - l0[j]);
      (std::abs(l0[j]) > tol::kSupport ? inside : outside) += diff;
    }
    const double c_slack = inside - outside + kLpTolerance;
    if (c_slack < c.slack) {
      c.slack = c_slack;
      c.witness = fmt::format("r={:.6g} off_support={:.6g} on_support={:.6g}", r, outside, inside);
    }
  }
  if (a.slack < 0.0) a.status = CheckStatus::kFail;
  if (gap_lo > gap_hi + kLpTolerance || (norm0 <= 10.0 && gap_lo >= 1e-3)) {
    a.status = CheckStatus::kFail;
    a.witness = fmt::format("gap at r={:.6g} is {:.6g}, at r={:.6g} is {:.6g}", r_lo, gap_lo, r_hi, gap_hi);
  }
  if (b.slack < 0.0) b.status = CheckStatus::kFail;
  if (c.slack < 0.0) c.status = CheckStatus::kFail;
  return {a, b, c};
}

double plateau_threshold(const Complexity& cx, double kappa2, double c_f, double d, std::size_t support) {
  if (support == 0 || !(kappa2 > 0.0) || !(c_f > 0.0)) return 0.0;
  const double s = static_cast<double>(support);
  if (cx.infinite()) return std::min(cx.gap, 1.0) * kappa2 / (2.0 * d * 2.0 * c_f * s);
  if (cx.alpha <= 0.0 || std::isinf(cx.a_const)) return 0.0;
  const double alpha = cx.alpha;
  return std::pow(2.0 * c_f, -(2.0 + alpha) / alpha) *
         std::pow(4.0 * cx.a_const * std::pow(2.0 * d, alpha), -1.0 / alpha) *
         std::pow(s / kappa2, -(1.0 + alpha) / alpha);
}

CheckRow check_plateau(const DiscreteDistribution& dist, const Dictionary& dict, const CostParams& cp,
                       std::span<const double> r_grid, std::span<const double> t_grid) {
  constexpr double kPlateauTolerance = 1e-6;
  CheckRow row{"plateau", CheckStatus::kSkipped, 0.0, ""};
  const Model base = fit_population(dist, dict, cp, 0.0);
  const std::vector<double>& l0 = base.lambda;
  const std::vector<double> f_l0 = atom_margins(dist, dict, l0);
  const std::vector<double> f0 = bayes_values(dist, cp);
  double mismatch = 0.0;
  for (std::size_t s = 0; s < f0.size(); ++s) mismatch = std::max(mismatch, std::abs(f_l0[s] - f0[s]));
  if (mismatch > kLpTolerance) {
    row.witness = fmt::format("f0 is not f_lambda(0) on the atoms (max gap {:.3g})", mismatch);
    return row;
  }
  std::size_t support = 0;
  for (double v : l0) support += std::abs(v) > tol::kSupport;
  if (support == 0) {
    row.witness = "lambda(0) = 0";
    return row;
  }

  const Matrix feats = atom_features(dist, dict);
  double c_f = 0.0;
  for (double v : feats.data()) c_f = std::max(c_f, std::abs(v));
  const KappaEstimate kappa = kappa_estimate(gram_psi(dist, dict), l0, 1.0);
  const Complexity cx = complexity_estimate(dist, cp.d(), t_grid);
  const double threshold = plateau_threshold(cx, kappa.kappa2, c_f, cp.d(), support);
  const double risk0 = phi_risk_at(dist, f_l0, cp);
  const double norm0 = l1_norm(l0);

  std::size_t checked = 0;
  double worst = 0.0;
  double worst_r = 0.0;
  for (double r : r_grid) {
    if (r > threshold) continue;
    const Model fit_r = fit_population(dist, dict, cp, r);
    const double obj_r = phi_risk_at(dist, atom_margins(dist, dict, fit_r.lambda), cp) + r * fit_r.l1();
    const double obj_0 = risk0 + r * norm0;
    double dist_l1 = 0.0;
    for (std::size_t j = 0; j < l0.size(); ++j) dist_l1 += std::abs(fit_r.lambda[j] - l0[j]);
    const double err = std::max(std::abs(obj_r - obj_0), dist_l1);
    if (err >= worst) {
      worst = err;
      worst_r = r;
    }
    ++checked;
  }
  row.witness = fmt::format("threshold={:.6g} kappa2<={:.6g} alpha={} A={:.6g} checked={} worst_r={:.6g}", threshold,
                            kappa.kappa2, cx.alpha, cx.a_const, checked, worst_r);
  if (checked == 0) return row;
  row.slack = kPlateauTolerance - worst;
  row.status = worst <= kPlateauTolerance ? CheckStatus::kPass : CheckStatus::kFail;
  return row;
}

std::vector<std::vector<double>> random_lambdas(std::size_t count, std::size_t m, double scale, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> out(count, std::vector<double>(m));
  for (auto& v : out) {
    for (double& x : v) x = scale * (2.0 * rng.uniform() - 1.0);
  }
  return out;
}

}  // namespace rsvm
