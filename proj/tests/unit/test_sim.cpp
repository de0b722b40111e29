#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rejectsvm/errors.hpp"
#include "rejectsvm/evaluate.hpp"
#include "rejectsvm/sim.hpp"

using namespace rsvm;

namespace {

// Bayes risk E[min(eta, 1 - eta, d)] of the two-Gaussian model by quadrature
// over the projection s = mu'x, distributed as an equal mixture of N(+-1, 1).
double two_gaussian_bayes(double d) {
  const double h = 1e-4;
  double total = 0.0;
  for (double s = -12.0; s <= 12.0; s += h) {
    const double dens = 0.5 * (std::exp(-0.5 * (s - 1) * (s - 1)) + std::exp(-0.5 * (s + 1) * (s + 1))) /
                        std::sqrt(2.0 * M_PI);
    const double eta = 1.0 / (1.0 + std::exp(-2.0 * s));
    total += h * dens * std::min({eta, 1.0 - eta, d});
  }
  return total;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n_train = 40;
  cfg.n_test = 4000;
  cfg.m = 10;
  cfg.repetitions = 2;
  cfg.r_grid = {0.01, 0.1, 5.0};
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("two-Gaussian sample") {
  const LabeledSample s = gen_two_gaussian(5000, 4, 1);
  REQUIRE(s.x.rows() == 10000);
  REQUIRE(s.x.cols() == 4);
  const double mu = 1.0 / std::sqrt(2.0);
  double mean[2][4] = {};
  for (std::size_t i = 0; i < s.x.rows(); ++i) {
    CHECK(s.y[i] == (i % 2 == 0 ? 1 : -1));
    const int c = s.y[i] == 1 ? 0 : 1;
    for (std::size_t j = 0; j < 4; ++j) mean[c][j] += s.x(i, j) / 5000.0;
    const double proj = mu * (s.x(i, 0) + s.x(i, 1));
    CHECK(s.eta[i] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * proj))).epsilon(1e-12));
  }
  const double se = 4.0 / std::sqrt(5000.0);
  CHECK(std::abs(mean[0][0] - mu) < se);
  CHECK(std::abs(mean[1][1] + mu) < se);
  CHECK(std::abs(mean[0][2]) < se);
  CHECK(std::abs(mean[1][3]) < se);
  CHECK_THROWS_AS(gen_two_gaussian(5, 1, 1), ParameterError);

  const LabeledSample again = gen_two_gaussian(5000, 4, 1);
  CHECK(again.x.data() == s.x.data());
}

TEST_CASE("two-Gaussian marginal draw") {
  const LabeledSample s = sample_two_gaussian(20000, 2, 3);
  double pos = 0.0;
  double eta_mean = 0.0;
  for (std::size_t i = 0; i < 20000; ++i) {
    pos += s.y[i] == 1;
    eta_mean += s.eta[i];
  }
  CHECK(std::abs(pos / 20000.0 - 0.5) < 0.02);
  CHECK(std::abs(eta_mean / 20000.0 - 0.5) < 0.02);
}

TEST_CASE("mixture model") {
  const MixtureModel mm = MixtureModel::standard();
  CHECK(mm.positive_centers.size() == 5);
  CHECK(mm.negative_centers.size() == 5);
  double mass = 0.0;
  const double h = 0.05;
  for (double x1 = -5.0; x1 <= 6.0; x1 += h) {
    for (double x2 = -5.0; x2 <= 6.0; x2 += h) {
      mass += mm.density(x1, x2) * h * h;
      const double e = mm.eta(x1, x2);
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
    }
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
  const double p = mm.class_density(1.0, 0.5, 1);
  const double q = mm.class_density(1.0, 0.5, -1);
  CHECK(mm.eta(1.0, 0.5) == doctest::Approx(p / (p + q)));
  CHECK(mm.density(1.0, 0.5) == doctest::Approx(0.5 * (p + q)));

  const LabeledSample s = gen_mixture(300, 7);
  CHECK(s.x.rows() == 600);
  int pos = 0;
  for (std::size_t i = 0; i < 600; ++i) {
    pos += s.y[i] == 1;
    CHECK(s.eta[i] == doctest::Approx(mm.eta(s.x(i, 0), s.x(i, 1))));
  }
  CHECK(pos == 300);
}

TEST_CASE("reject versus plain table") {
  const ExperimentConfig cfg = small_config();
  const std::vector<ArmResult> rows = run_reject_vs_plain(cfg);
  REQUIRE(rows.size() == 2 * 3 * 2);
  const double bayes = two_gaussian_bayes(0.25);
  for (const ArmResult& row : rows) {
    CHECK(std::abs(row.ell_risk - (row.misclass + 0.25 * row.reject)) <= 1e-12);
    CHECK(row.excess_ell == doctest::Approx(row.ell_risk - row.bayes_risk_mc));
    CHECK(std::abs(row.bayes_risk_mc - bayes) <= 3.0 * row.bayes_risk_se + 1e-3);
    if (row.arm == "plain" && row.r < 1.0) {
      CHECK(row.reject == 0.0);
      CHECK(row.ell_risk == row.misclass);
    }
    if (row.r == 5.0) {
      CHECK(row.reject == 1.0);
      CHECK(row.ell_risk == 0.25);
    }
  }

  std::ostringstream a;
  std::ostringstream b;
  write_arm_results(a, rows);
  write_arm_results(b, run_reject_vs_plain(cfg));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("scenario,repetition,r,arm,", 0) == 0);

  ExperimentConfig other = cfg;
  other.seed = 6;
  std::ostringstream c;
  write_arm_results(c, run_reject_vs_plain(other));
  CHECK(c.str() != a.str());
}

TEST_CASE("Monte Carlo Bayes risk is unbiased") {
  ExperimentConfig cfg = small_config();
  cfg.n_test = 100000;
  cfg.repetitions = 1;
  cfg.r_grid = {1.0};
  const std::vector<ArmResult> rows = run_reject_vs_plain(cfg);
  const double bayes = two_gaussian_bayes(0.25);
  CHECK(std::abs(rows.front().bayes_risk_mc - bayes) <= 3.0 * rows.front().bayes_risk_se);
}

TEST_CASE("mixture scenario arms") {
  ExperimentConfig cfg = small_config();
  cfg.scenario = "mixture";
  cfg.repetitions = 1;
  const std::vector<ArmResult> rows = run_reject_vs_plain(cfg);
  CHECK(rows.size() == 6);
  cfg.scenario = "bogus";
  CHECK_THROWS_AS(run_reject_vs_plain(cfg), ParameterError);
}

TEST_CASE("bound coverage rows") {
  ExperimentConfig cfg = small_config();
  cfg.repetitions = 3;
  const std::vector<CoverageRow> rows = run_bound_coverage(cfg, 0.05, 0.1, 1.0);
  REQUIRE(rows.size() == 3);
  for (const CoverageRow& row : rows) {
    CHECK(row.true_misclass >= 0.0);
    CHECK(row.true_misclass <= 1.0);
    CHECK(row.true_misclass <= row.bound_misclass);
    CHECK(row.true_reject <= row.bound_reject);
    CHECK(row.l1 <= 1.0 / 0.05 + 1e-7);
  }
  std::ostringstream a;
  std::ostringstream b;
  write_coverage(a, rows);
  write_coverage(b, run_bound_coverage(cfg, 0.05, 0.1, 1.0));
  CHECK(a.str() == b.str());
}

TEST_CASE("mixture boundaries") {
  ExperimentConfig cfg;
  cfg.scenario = "mixture";
  cfg.n_train = 100;
  cfg.seed = 2;
  const BoundaryResult res = run_mixture_boundaries(cfg, 5, 20);
  CHECK(res.cells.size() == 400);
  CHECK(res.cv_r > 0.0);
  std::size_t rejects = 0;
  for (const BoundaryCell& cell : res.cells) {
    CHECK(cell.optimal == bayes_rule(cell.eta, 0.25));
    CHECK(cell.estimated == decide(cell.margin, 0.5));
    rejects += cell.estimated == 0;
  }
  CHECK(rejects == res.reject_cells);
  CHECK(res.agreement_dense >= 0.0);
  CHECK(res.agreement_dense <= 1.0);
}
