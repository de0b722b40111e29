#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rejectsvm/losses.hpp"
#include "rejectsvm/matrix.hpp"

namespace rsvm {

// Features with labels and the true eta(x) of every row.
struct LabeledSample {
  Matrix x;
  std::vector<int> y;
  std::vector<double> eta;
};

// Class means +-mu with mu = (1/sqrt2, 1/sqrt2, 0, ..., 0), identity covariance,
// labels alternating +1, -1. eta(x) = 1 / (1 + exp(-2 mu'x)).
LabeledSample gen_two_gaussian(std::size_t n_per_class, std::size_t m, std::uint64_t seed);

// n draws from the equal-prior marginal of the same model (labels drawn too).
LabeledSample sample_two_gaussian(std::size_t n, std::size_t m, std::uint64_t seed);

// Two-dimensional Gaussian mixtures, five components per class with equal
// weights and covariance I/5, equal class priors.
struct MixtureModel {
  std::vector<std::array<double, 2>> positive_centers;
  std::vector<std::array<double, 2>> negative_centers;
  double variance = 0.2;

  static MixtureModel standard();
  double class_density(double x1, double x2, int label) const;
  double density(double x1, double x2) const;  // equal-prior marginal
  double eta(double x1, double x2) const;
};

// n_per_class points from each class, labels alternating, exact eta attached.
LabeledSample gen_mixture(std::size_t n_per_class, std::uint64_t seed, const MixtureModel& model = MixtureModel::standard());

struct ExperimentConfig {
  std::string scenario = "two_gaussian";
  std::size_t n_train = 100;  // total, split evenly between the classes
  std::size_t n_test = 100000;
  std::size_t m = 200;
  double d = 0.25;
  double tau = 0.5;
  std::vector<double> r_grid;  // empty: default_r_grid(a, 1)
  std::size_t repetitions = 50;
  std::uint64_t seed = 1;
};

// One line of the long-format comparison table.
struct ArmResult {
  std::string scenario;
  std::size_t repetition = 0;
  double r = 0.0;
  std::string arm;  // "reject" or "plain"
  double phi_risk = 0.0;
  double ell_risk = 0.0;
  double misclass = 0.0;
  double reject = 0.0;
  double excess_ell = 0.0;
  double bayes_risk_mc = 0.0;
  double bayes_risk_se = 0.0;
};

// Per repetition and r: fits the reject arm (slope (1-d)/d, threshold tau) and
// the plain arm (d = 1/2, slope 1, scored by sign with rejection cost d) on
// the same training sample, and scores both on a test sample through the true
// eta, i.e. by conditional expectation over the label.
std::vector<ArmResult> run_reject_vs_plain(const ExperimentConfig& config);

void write_arm_results(std::ostream& out, const std::vector<ArmResult>& rows);

// Per repetition of gen_two_gaussian: the error-rate bounds for a fit at
// fixed r against the true rates on a test sample.
struct CoverageRow {
  std::size_t repetition = 0;
  double l1 = 0.0;
  double true_misclass = 0.0;  // P{Y f <= -tau}
  double bound_misclass = 0.0;
  double true_reject = 0.0;    // P{|f| <= tau}
  double bound_reject = 0.0;
};

std::vector<CoverageRow> run_bound_coverage(const ExperimentConfig& config, double r, double delta, double p);

void write_coverage(std::ostream& out, const std::vector<CoverageRow>& rows);

struct BoundaryCell {
  double x1 = 0.0;
  double x2 = 0.0;
  double density = 0.0;
  double eta = 0.0;
  double margin = 0.0;
  int estimated = 0;
  int optimal = 0;
};

struct BoundaryResult {
  double cv_r = 0.0;
  std::vector<BoundaryCell> cells;
  double agreement_dense = 0.0;  // agreement on cells with density above the median
  std::size_t reject_cells = 0;
};

// Fits an RBF-lattice model (lattice_side^2 centers on the bounding box of
// the training data, bandwidth 2) with r chosen by tenfold CV, and labels a
// grid_side x grid_side grid over the same box by the fitted and the optimal rule.
BoundaryResult run_mixture_boundaries(const ExperimentConfig& config, std::size_t lattice_side = 10,
                                      std::size_t grid_side = 60);

void write_boundaries(std::ostream& out, const BoundaryResult& result);

}  // namespace rsvm
