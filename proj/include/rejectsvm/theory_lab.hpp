#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rejectsvm/dictionary.hpp"
#include "rejectsvm/losses.hpp"
#include "rejectsvm/matrix.hpp"

namespace rsvm {

// Psi_ij = 4 sum_x p(x) f_i(x) f_j(x) eta(x) (1 - eta(x)).
Matrix gram_psi(const DiscreteDistribution& dist, const Dictionary& dict);

// sqrt(sum_x p(x) g(x)^2 eta(x)(1 - eta(x))) for g given at the atoms.
double weighted_norm(const DiscreteDistribution& dist, std::span<const double> g);

struct KappaEstimate {
  double kappa2 = 0.0;        // smallest ratio found: an upper bound on kappa^2
  std::vector<double> delta;  // direction attaining it
  bool upper_bound = true;
};

// Searches the cone ||delta_{I^c}||_1 <= c ||delta_I||_1, I = supp(theta), for
// the smallest delta' Psi delta / (4 ||delta_I||_2^2). Candidates are the
// lowest eigenvector of Psi_II and `budget` random cone points, the best few
// then refined by shrinking random steps. Throws ParameterError for theta = 0
// or c < 1.
KappaEstimate kappa_estimate(const Matrix& psi, std::span<const double> theta, double c, std::size_t budget = 2000,
                             std::uint64_t seed = 0);

// Margin exponent of P{|eta - d| <= t} and P{|eta - (1-d)| <= t}.
struct Complexity {
  double alpha = 0.0;     // +infinity when eta stays away from d and 1-d
  double a_const = 1.0;   // smallest A >= 1 valid for every t > 0 at this alpha
  double gap = 0.0;       // min over atoms of min(|eta - d|, |eta - (1-d)|)
  bool infinite() const;
};

// max(P{|eta - d| <= t}, P{|eta - (1-d)| <= t}).
double near_boundary_mass(const DiscreteDistribution& dist, double d, double t);

// Smallest A >= 1 with near_boundary_mass(t) <= A t^alpha for all t > 0.
// The supremum is attained at the atom distances, so it is exact.
double complexity_constant(const DiscreteDistribution& dist, double d, double alpha);

// alpha is the least-squares slope of log mass against log t over the grid
// points with positive mass (clipped at 0); it is +infinity when the mass is
// zero at every grid point up to the witnessed gap. A is then exact.
Complexity complexity_estimate(const DiscreteDistribution& dist, double d, std::span<const double> t_grid);

// 40 log-spaced points on [1e-3, 0.2].
std::vector<double> default_t_grid();

enum class CheckStatus { kPass, kFail, kSkipped };
std::string_view to_string(CheckStatus status);

// One line of a diagnostic report. slack is the smallest margin by which the
// checked inequality held (negative on failure); witness describes the worst case.
struct CheckRow {
  std::string name;
  CheckStatus status = CheckStatus::kPass;
  double slack = 0.0;
  std::string witness;
};

// Psi symmetric and positive semi-definite: slack is the smallest eigenvalue
// (tolerance 1e-9).
CheckRow check_psi(const Matrix& psi);

// ||f - f0||^{2+2 alpha} <= 4 A (2d)^alpha ||f - f0||_inf^{2+alpha} (Delta R_phi)^alpha
// for every lambda given. Skipped when alpha is infinite or zero.
CheckRow check_lemma_a1(const DiscreteDistribution& dist, const Dictionary& dict, const CostParams& cp,
                        const Complexity& cx, std::span<const std::vector<double>> lambdas);

// Delta R_ell(f) <= Delta R_phi(f) for every f given at the atoms. Throws
// ParameterError when tau lies outside [d, 1-d].
CheckRow check_excess_domination(const DiscreteDistribution& dist, const CostParams& cp,
                                 std::span<const std::vector<double>> f_values);

// Fits lambda(0) and lambda(r) on the grid and checks
//   (a) risk gap at the smallest r is no larger than at the largest r, and
//       below 1e-3 when ||lambda(0)||_1 <= 10;
//   (b) ||lambda(r)||_1 <= ||lambda(0)||_1;
//   (c) sum_{j not in I0} |lambda_j(r) - lambda_j(0)| <= sum_{j in I0} |...|.
std::vector<CheckRow> check_prop21(const DiscreteDistribution& dist, const Dictionary& dict, const CostParams& cp,
                                   std::span<const double> r_grid);

// Largest r for which lambda(r) = lambda(0) is guaranteed when f0 = f_lambda(0):
//   (2 C_F)^{-(2+alpha)/alpha} {4 A (2d)^alpha}^{-1/alpha} (kappa^-2 ||theta||_0)^{-(1+alpha)/alpha},
// with the alpha -> infinity limit gap kappa^2 / (2d 2 C_F ||theta||_0).
double plateau_threshold(const Complexity& cx, double kappa2, double c_f, double d, std::size_t support);

// Checks lambda(r) = lambda(0) (objective and l1 distance within 1e-6) for
// every grid r below the threshold. Skipped unless f0 = f_lambda(0) on the
// atoms. kappa^2 comes from kappa_estimate, so the threshold is itself an
// upper estimate; the witness records it.
CheckRow check_plateau(const DiscreteDistribution& dist, const Dictionary& dict, const CostParams& cp,
                       std::span<const double> r_grid, std::span<const double> t_grid);

// Random coefficient vectors with entries uniform on [-scale, scale].
std::vector<std::vector<double>> random_lambdas(std::size_t count, std::size_t m, double scale, std::uint64_t seed);

}  // namespace rsvm
