#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rejectsvm/errors.hpp"
#include "rejectsvm/evaluate.hpp"
#include "rejectsvm/rng.hpp"

using namespace rsvm;

namespace {

Model linear_model(std::vector<double> lambda, double d = 0.25) {
  return Model{std::move(lambda), Dictionary::linear(2).with_sup_norm({2.0, true}), CostParams(d), 0.1, {}};
}

}  // namespace

TEST_CASE("decisions and predictions") {
  CHECK(decide(0.5, 0.5) == 0);
  CHECK(decide(-0.5, 0.5) == 0);
  CHECK(decide(0.51, 0.5) == 1);
  CHECK(decide(-0.51, 0.5) == -1);
  CHECK(decide(0.0, 0.0) == 0);

  const Model model = linear_model({1.0, -2.0});
  const Prediction p = predict(model, std::vector<double>{1.0, 0.0});
  CHECK(p.margin == 1.0);
  CHECK(p.decision == 1);
  CHECK(predict(model, std::vector<double>{0.0, 0.1}).decision == 0);
  CHECK(predict(model, std::vector<double>{0.0, 1.0}).decision == -1);
  CHECK_THROWS_AS(predict(model, std::vector<double>{1.0}), StructuralError);

  const Model zero = linear_model({0.0, 0.0});
  CHECK(predict(zero, std::vector<double>{5.0, -3.0}).decision == 0);
}

TEST_CASE("risk of the zero model") {
  const Model zero = linear_model({0.0, 0.0});
  Matrix rows(4, 2, 1.0);
  const std::vector<int> labels{1, -1, 1, 1};
  const RiskReport rep = risk_report(zero, rows, labels, std::nullopt, 0.1);
  CHECK(rep.n_eval == 4);
  CHECK(rep.phi_risk == 1.0);
  CHECK(rep.reject_rate == 1.0);
  CHECK(rep.misclass_rate == 0.0);
  CHECK(rep.ell_risk == 0.25);
  REQUIRE(rep.excess_ell.has_value());
  CHECK(*rep.excess_ell == doctest::Approx(0.15));

  const RiskReport plain = risk_report(zero, rows, labels, DecisionRule{0.25, 0.0});
  CHECK(plain.reject_rate == 1.0);
  CHECK_FALSE(plain.excess_ell.has_value());
}

TEST_CASE("risk report values and decomposition") {
  const std::vector<double> margins{2.0, -0.3, 0.6, -1.0, 0.0};
  const std::vector<int> labels{1, 1, -1, 1, -1};
  const RiskReport rep = risk_from_margins(margins, labels, 3.0, DecisionRule{0.25, 0.5});
  CHECK(rep.misclass_rate == doctest::Approx(0.4));
  CHECK(rep.reject_rate == doctest::Approx(0.4));
  CHECK(rep.ell_risk == doctest::Approx(0.5));
  CHECK(rep.phi_risk == doctest::Approx((0.0 + 1.9 + 2.8 + 4.0 + 1.0) / 5.0));
  CHECK_THROWS_AS(risk_from_margins({}, {}, 3.0, DecisionRule{0.25, 0.5}), DataError);
  CHECK_THROWS_AS(risk_from_margins(margins, std::vector<int>{1}, 3.0, DecisionRule{0.25, 0.5}), StructuralError);

  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> f(1 + rng.below(50));
    std::vector<int> y(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = rng.below(4) == 0 ? 0.5 * (rng.below(3) - 1.0) : 2.0 * rng.normal();
      y[i] = rng.below(2) == 0 ? -1 : 1;
    }
    const double d = 0.05 + 0.45 * rng.uniform();
    const RiskReport r = risk_from_margins(f, y, (1 - d) / d, DecisionRule{d, 0.5});
    CHECK(std::abs(r.ell_risk - (r.misclass_rate + d * r.reject_rate)) <= 1e-12);
  }
}

TEST_CASE("rate penalty") {
  CHECK(rate_r(0.5, 100, 200, 1.0, 0.1, 1.0) == doctest::Approx(7.988910620581041).epsilon(1e-13));
  const double base = rate_r(0.3, 50, 20, 1.5, 0.05, 2.0);
  CHECK(rate_r(0.6, 50, 20, 3.0, 0.05, 2.0) == doctest::Approx(base).epsilon(1e-14));
  CHECK(rate_r(0.15, 50, 20, 1.5, 0.05, 2.0) == doctest::Approx(2.0 * base).epsilon(1e-14));
  CHECK_THROWS_AS(rate_r(0.0, 50, 20, 1.0, 0.05, 1.0), ParameterError);
  const std::vector<double> grid = default_gamma_grid();
  CHECK(grid.size() == 25);
  CHECK(grid.front() == doctest::Approx(0.02));
  CHECK(grid.back() == doctest::Approx(2.0));
}

TEST_CASE("bounds") {
  const std::vector<double> grid = default_gamma_grid();
  const std::vector<double> zero(10, 0.0);
  std::vector<int> labels(10, 1);
  const BoundReport z = bounds_from_margins(zero, labels, 0.0, 0.5, 3, 1.0, grid, 0.1, 1.0);
  CHECK(z.tail == doctest::Approx(0.1));
  CHECK(z.misclass.value == doctest::Approx(0.1));
  CHECK(z.reject.value == doctest::Approx(1.1));

  Rng rng(3);
  std::vector<double> f(40);
  for (double& v : f) v = rng.normal();
  labels.assign(40, 1);
  for (std::size_t i = 0; i < 40; i += 3) labels[i] = -1;
  const BoundReport loose = bounds_from_margins(f, labels, 0.05, 0.5, 10, 1.0, grid, 0.01, 1.0);
  const BoundReport tight = bounds_from_margins(f, labels, 0.05, 0.5, 10, 1.0, grid, 0.2, 1.0);
  CHECK(tight.misclass.value <= loose.misclass.value);
  CHECK(tight.reject.value <= loose.reject.value);
  CHECK(std::find(grid.begin(), grid.end(), tight.misclass.gamma) != grid.end());
  CHECK(tight.misclass.value ==
        doctest::Approx(tight.misclass.empirical + tight.misclass.penalty + tight.tail).epsilon(1e-14));
  for (double g : grid) {
    double inside = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) inside += labels[i] * f[i] <= -0.5 + g;
    const double value = inside / 40.0 + rate_r(g, 40, 10, 1.0, 0.2, 1.0) * 0.05 + 1.0 / 40.0;
    CHECK(tight.misclass.value <= value + 1e-12);
  }

  CHECK_THROWS_AS(bounds_from_margins(f, labels, 0.05, 0.5, 10, 1.0, std::vector<double>{}, 0.1, 1.0),
                  ParameterError);
  CHECK_THROWS_AS(bounds_from_margins(f, labels, 0.05, 0.5, 10, 1.0, std::vector<double>{-0.1}, 0.1, 1.0),
                  ParameterError);
  CHECK_THROWS_AS(bounds_from_margins(f, labels, 0.05, 0.5, 10, 1.0, grid, 1.5, 1.0), ParameterError);

  const Model model = linear_model({0.5, 0.0});
  Matrix rows(3, 2);
  rows(0, 0) = 1.0;
  rows(1, 0) = -2.0;
  const BoundReport fromModel = bounds(model, rows, std::vector<int>{1, -1, 1}, grid, 0.1, 1.0);
  CHECK(fromModel.l1 == 0.5);
  CHECK(fromModel.misclass.penalty == doctest::Approx(rate_r(fromModel.misclass.gamma, 3, 2, 2.0, 0.1, 1.0) * 0.5));
}
