#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rejectsvm/dictionary.hpp"
#include "rejectsvm/losses.hpp"
#include "rejectsvm/lp.hpp"

namespace rsvm {

struct TrainMeta {
  std::size_t n = 0;
  double objective = 0.0;
  std::size_t iterations = 0;
};

// Fitted discriminant f(x) = sum_j lambda_j f_j(x). The dictionary carries
// the C_F used during training.
struct Model {
  std::vector<double> lambda;
  Dictionary dict;
  CostParams cp;
  double r = 0.0;
  TrainMeta meta;

  double margin(std::span<const double> x) const;
  std::vector<double> margins(const Matrix& rows) const;
  double l1() const;
  std::size_t support_size() const;
};

// LP whose optimum is argmin (1/n) sum_i phi(y_i f(x_i)) + r ||lambda||_1.
// Variable layout: lambda (M, free), xi (n, >= 0), t (M, >= 0). Per sample:
// xi_i + y_i h_i >= 1 and xi_i + a y_i h_i >= 1; per coefficient:
// t_j - lambda_j >= 0 and t_j + lambda_j >= 0.
lp::LinearProgram assemble_lp(const DesignMatrix& phi, const CostParams& cp, double r);

struct FitResult {
  std::vector<double> lambda;
  double objective = 0.0;
  std::size_t iterations = 0;
};

// Minimizes the same objective as assemble_lp by running solve_lp on the
// LP dual of that program, which has n + 2M rows and 2n columns and needs
// no phase 1. A tableau dump in options shows that dual program.
FitResult fit_coefficients(const DesignMatrix& phi, const CostParams& cp, double r,
                           const lp::SolveOptions& options = {});

// Fits and packages a Model. C_F is estimated on phi when the dictionary
// does not declare it.
Model fit(const Dictionary& dict, const DesignMatrix& phi, const CostParams& cp, double r,
          const lp::SolveOptions& options = {});

// (1/n) sum_i phi(y_i h_i) and the penalized objective at a given lambda.
double empirical_phi_risk(const DesignMatrix& phi, const CostParams& cp, std::span<const double> lambda);
double penalized_objective(const DesignMatrix& phi, const CostParams& cp, double r, std::span<const double> lambda);

// Population version: two weighted slacks per atom, weights p*eta for the
// margin +f(x) and p*(1-eta) for -f(x).
lp::LinearProgram assemble_population_lp(const DiscreteDistribution& dist, const Dictionary& dict,
                                         const CostParams& cp, double r);
Model fit_population(const DiscreteDistribution& dist, const Dictionary& dict, const CostParams& cp, double r);

// f_lambda evaluated at every atom.
std::vector<double> atom_margins(const DiscreteDistribution& dist, const Dictionary& dict,
                                 std::span<const double> lambda);

struct CvRow {
  double r;
  double mean_ell;  // pooled held-out reject-loss risk
  double fold_se;   // standard error across fold means
};

struct CvResult {
  double best_r;
  std::vector<CvRow> table;
};

// k-fold CV over r_grid scored with the reject loss at cp.tau(). Folds come
// from a seeded permutation; ties go to the larger r.
CvResult cross_validate(const DesignMatrix& phi, const CostParams& cp, std::span<const double> r_grid,
                        std::size_t folds = 10, std::uint64_t seed = 0);

// 9 sqrt(2 log(2 max(M,n)) / n) + 2 p log2(n) / sqrt(2 max(M,n)) + sqrt(2 log(1/delta) / n).
// Throws ParameterError unless n, M >= 1, delta in (0,1) and p >= 1.
double deviation_bracket(std::size_t n, std::size_t m, double delta, double p);

// Smallest r for which the empirical-vs-population oracle inequality holds
// with probability 1 - delta:
//   a C_F { 9 sqrt(2 log(2 max(M,n)) / n) + 2 p log2(n) / sqrt(2 max(M,n))
//           + sqrt(2 log(1/delta) / n) }.
double theoretical_r(std::size_t n, std::size_t m, double c_f, const CostParams& cp, double delta, double p);

std::vector<double> log_grid(double lo, double hi, std::size_t count);
// 30 log-spaced points on [1e-4, a C_F].
std::vector<double> default_r_grid(double a, double c_f, std::size_t count = 30);

}  // namespace rsvm
