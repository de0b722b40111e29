#include <doctest.h>

#include <cmath>
#include <limits>

#include "rejectsvm/errors.hpp"
#include "rejectsvm/rng.hpp"
#include "rejectsvm/theory_lab.hpp"
#include "rejectsvm/train.hpp"

using namespace rsvm;

namespace {

DiscreteDistribution plateau_fixture() {
  return {{{{-1.0}, 1.0 / 3.0, 0.1}, {{0.0}, 1.0 / 3.0, 0.5}, {{1.0}, 1.0 / 3.0, 0.9}}};
}

DiscreteDistribution five_atoms() {
  return {{{{-1.0}, 0.2, 0.05}, {{-0.5}, 0.2, 0.26}, {{0.0}, 0.2, 0.5}, {{0.5}, 0.2, 0.7}, {{1.0}, 0.2, 0.97}}};
}

DiscreteDistribution random_2d(Rng& rng, std::size_t atoms) {
  DiscreteDistribution dist;
  for (std::size_t s = 0; s < atoms; ++s) {
    dist.atoms.push_back({{rng.normal(), rng.normal()}, 1.0 / static_cast<double>(atoms), rng.uniform()});
  }
  dist.atoms.back().p = 1.0 - static_cast<double>(atoms - 1) / static_cast<double>(atoms);
  return dist;
}

Matrix diag(std::vector<double> v) {
  Matrix m(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m(i, i) = v[i];
  return m;
}

}  // namespace

TEST_CASE("Psi on a three-center fixture") {
  Matrix centers(3, 1);
  centers(0, 0) = -1.0;
  centers(2, 0) = 1.0;
  const Dictionary dict = Dictionary::custom_rbf(centers, 2.0);
  const DiscreteDistribution dist{{{{-1.0}, 0.2, 0.3}, {{0.5}, 0.3, 0.6}, {{2.0}, 0.5, 0.85}}};
  const Matrix psi = gram_psi(dist, dict);
  const double expected[3][3] = {{0.168035542023577, 0.024676856320790364, 0.00199688698281841},
                                 {0.024676856320790364, 0.10902633508715227, 0.10596848322766492},
                                 {0.0019968869828184107, 0.10596848322766492, 0.11061978587991196}};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(psi(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-12));
  }
  CHECK(check_psi(psi).status == CheckStatus::kPass);
}

TEST_CASE("Psi matches a direct double loop") {
  Rng rng(14);
  for (int t = 0; t < 20; ++t) {
    DiscreteDistribution dist;
    for (int s = 0; s < 7; ++s) dist.atoms.push_back({{rng.normal(), rng.normal(), rng.normal()}, 1.0 / 7.0, rng.uniform()});
    dist.atoms.back().p = 1.0 - 6.0 / 7.0;
    const Dictionary dict = Dictionary::constant_linear(3);
    const Matrix psi = gram_psi(dist, dict);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        double sum = 0.0;
        for (const Atom& a : dist.atoms) {
          const double fi = i == 0 ? 1.0 : a.x[i - 1];
          const double fj = j == 0 ? 1.0 : a.x[j - 1];
          sum += 4.0 * a.p * fi * fj * a.eta * (1.0 - a.eta);
        }
        CHECK(psi(i, j) == doctest::Approx(sum).epsilon(1e-13));
      }
    }
    CHECK(check_psi(psi).status == CheckStatus::kPass);
  }
  Matrix bad = diag({1.0, -0.5});
  CHECK(check_psi(bad).status == CheckStatus::kFail);
  bad(0, 1) = 0.1;
  CHECK(check_psi(bad).status == CheckStatus::kFail);
}

TEST_CASE("weighted seminorm") {
  const DiscreteDistribution dist = plateau_fixture();
  CHECK(weighted_norm(dist, std::vector<double>{1.0, 1.0, 1.0}) ==
        doctest::Approx(std::sqrt((0.09 + 0.25 + 0.09) / 3.0)));
  Rng rng(2);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> g(3), h(3), s(3);
    for (int k = 0; k < 3; ++k) {
      g[k] = rng.normal();
      h[k] = rng.normal();
      s[k] = g[k] + h[k];
    }
    CHECK(weighted_norm(dist, s) <= weighted_norm(dist, g) + weighted_norm(dist, h) + 1e-12);
  }
}

TEST_CASE("kappa on analytic cases") {
  const std::vector<double> full{1.0, 1.0};
  CHECK(kappa_estimate(diag({1.0, 1.0}), full, 3.0).kappa2 == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(kappa_estimate(diag({1.0, 4.0}), full, 3.0).kappa2 == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(kappa_estimate(diag({0.0, 0.0}), full, 3.0).kappa2 == doctest::Approx(0.0));
  const KappaEstimate sparse = kappa_estimate(diag({1.0, 1.0, 1.0}), std::vector<double>{1.0, 0.0, 0.0}, 1.0);
  CHECK(sparse.kappa2 == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(sparse.upper_bound);
  CHECK(sparse.delta.size() == 3);
  const KappaEstimate repeat = kappa_estimate(diag({1.0, 1.0, 1.0}), std::vector<double>{1.0, 0.0, 0.0}, 1.0);
  CHECK(repeat.kappa2 == sparse.kappa2);
  CHECK_THROWS_AS(kappa_estimate(diag({1.0}), std::vector<double>{0.0}, 3.0), ParameterError);
  CHECK_THROWS_AS(kappa_estimate(diag({1.0}), std::vector<double>{1.0}, 0.5), ParameterError);
}

TEST_CASE("kappa estimate is a genuine ratio") {
  Rng rng(3);
  const DiscreteDistribution dist = random_2d(rng, 8);
  const Dictionary dict = Dictionary::rbf_lattice({3, 3}, {-1.0, -1.0}, {1.0, 1.0});
  const Matrix psi = gram_psi(dist, dict);
  std::vector<double> theta(9, 0.0);
  theta[4] = 1.0;
  theta[0] = -0.5;
  const KappaEstimate k = kappa_estimate(psi, theta, 3.0, 500, 5);
  double quad = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) quad += k.delta[i] * psi(i, j) * k.delta[j];
  }
  const double on = k.delta[0] * k.delta[0] + k.delta[4] * k.delta[4];
  CHECK(quad / (4.0 * on) == doctest::Approx(k.kappa2).epsilon(1e-9));
  double off = 0.0;
  for (std::size_t j = 0; j < 9; ++j) off += (j == 0 || j == 4) ? 0.0 : std::abs(k.delta[j]);
  CHECK(off <= 3.0 * (std::abs(k.delta[0]) + std::abs(k.delta[4])) + 1e-9);
}

TEST_CASE("complexity") {
  const Complexity far = complexity_estimate(plateau_fixture(), 0.25, default_t_grid());
  CHECK(far.infinite());
  CHECK(far.gap == doctest::Approx(0.15));

  DiscreteDistribution uniform;
  for (int s = 0; s < 1000; ++s) uniform.atoms.push_back({{0.0}, 1e-3, (s + 0.5) / 1000.0});
  double total = 0.0;
  for (int s = 0; s < 999; ++s) total += 1e-3;
  uniform.atoms.back().p = 1.0 - total;
  const Complexity cx = complexity_estimate(uniform, 0.25, default_t_grid());
  CHECK_FALSE(cx.infinite());
  CHECK(cx.alpha == doctest::Approx(1.0).epsilon(0.1));
  for (double t : default_t_grid()) CHECK(near_boundary_mass(uniform, 0.25, t) <= cx.a_const * std::pow(t, cx.alpha) + 1e-12);

  CHECK(near_boundary_mass(five_atoms(), 0.25, 0.0101) == doctest::Approx(0.2));
  CHECK(near_boundary_mass(five_atoms(), 0.25, 0.05) == doctest::Approx(0.2));
  CHECK(near_boundary_mass(five_atoms(), 0.25, 0.2) == doctest::Approx(0.4));
  CHECK(complexity_constant(five_atoms(), 0.25, 1.0) == doctest::Approx(20.0));
}

TEST_CASE("lemma inequality") {
  const DiscreteDistribution dist = five_atoms();
  const Dictionary dict = Dictionary::constant_linear(1);
  const CostParams cp(0.25);
  const Complexity cx{1.0, complexity_constant(dist, 0.25, 1.0), 0.01};
  const auto lambdas = random_lambdas(200, dict.size(), 3.0, 11);
  CHECK(check_lemma_a1(dist, dict, cp, cx, lambdas).status == CheckStatus::kPass);

  DiscreteDistribution off_center = dist;
  off_center.atoms[2].eta = 0.45;
  const CostParams half(0.5);
  const Complexity cx_half{1.0, complexity_constant(off_center, 0.5, 1.0), 0.05};
  CHECK(cx_half.a_const == doctest::Approx(4.0));
  CHECK(check_lemma_a1(off_center, dict, half, cx_half, lambdas).status == CheckStatus::kPass);

  const Dictionary rbf = Dictionary::rbf_lattice({4}, {-1.0}, {1.0});
  CHECK(check_lemma_a1(dist, rbf, cp, cx, random_lambdas(200, 4, 5.0, 12)).status == CheckStatus::kPass);

  const Complexity inf{std::numeric_limits<double>::infinity(), 1.0, 0.15};
  CHECK(check_lemma_a1(dist, dict, cp, inf, lambdas).status == CheckStatus::kSkipped);
}

TEST_CASE("excess risk domination") {
  Rng rng(50);
  for (int t = 0; t < 50; ++t) {
    const DiscreteDistribution dist = random_2d(rng, 2 + rng.below(8));
    const double d = 0.05 + 0.45 * rng.uniform();
    const CostParams cp(d, d + (1.0 - 2.0 * d) * rng.uniform());
    std::vector<std::vector<double>> fs(10, std::vector<double>(dist.atoms.size()));
    for (auto& f : fs) {
      for (double& v : f) v = rng.below(5) == 0 ? std::round(rng.normal()) : 2.0 * rng.normal();
    }
    CHECK(check_excess_domination(dist, cp, fs).status == CheckStatus::kPass);
  }
  CHECK_THROWS_AS(check_excess_domination(plateau_fixture(), CostParams(0.25, 0.0), {}), ParameterError);
}

TEST_CASE("support and monotonicity along the population path") {
  Rng rng(71);
  for (int t = 0; t < 3; ++t) {
    const DiscreteDistribution dist = random_2d(rng, 6);
    const Dictionary dict = Dictionary::rbf_lattice({3, 3}, {-2.0, -2.0}, {2.0, 2.0});
    const auto rows = check_prop21(dist, dict, CostParams(0.25), log_grid(1e-4, 3.0, 20));
    REQUIRE(rows.size() == 3);
    for (const CheckRow& row : rows) CHECK_MESSAGE(row.status == CheckStatus::kPass, row.name << " " << row.witness);
  }
  const auto rows = check_prop21(plateau_fixture(), Dictionary::constant_linear(1), CostParams(0.25),
                                 log_grid(1e-4, 3.0, 20));
  for (const CheckRow& row : rows) CHECK(row.status == CheckStatus::kPass);
}

TEST_CASE("plateau") {
  const Complexity inf{std::numeric_limits<double>::infinity(), 1.0, 0.15};
  CHECK(plateau_threshold(inf, 0.06, 1.0, 0.25, 1) == doctest::Approx(0.009));
  const Complexity one{1.0, 2.0, 0.0};
  const double expected = std::pow(2.0, -3.0) * std::pow(4.0 * 2.0 * 0.5, -1.0) * std::pow(2.0 / 0.1, -2.0);
  CHECK(plateau_threshold(one, 0.1, 1.0, 0.25, 2) == doctest::Approx(expected));

  const CheckRow row = check_plateau(plateau_fixture(), Dictionary::constant_linear(1), CostParams(0.25),
                                     log_grid(1e-5, 1.0, 20), default_t_grid());
  CHECK_MESSAGE(row.status == CheckStatus::kPass, row.witness);

  Rng rng(4);
  const CheckRow skipped = check_plateau(random_2d(rng, 5), Dictionary::constant_linear(2), CostParams(0.25),
                                         log_grid(1e-5, 1.0, 20), default_t_grid());
  CHECK(skipped.status == CheckStatus::kSkipped);
}

TEST_CASE("random lambdas are reproducible") {
  const auto a = random_lambdas(5, 3, 2.0, 9);
  const auto b = random_lambdas(5, 3, 2.0, 9);
  CHECK(a == b);
  for (const auto& v : a) {
    CHECK(v.size() == 3);
    for (double x : v) CHECK(std::abs(x) <= 2.0);
  }
}
