#include "rejectsvm/sim.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>

#include "rejectsvm/dictionary.hpp"
#include "rejectsvm/errors.hpp"
#include "rejectsvm/evaluate.hpp"
#include "rejectsvm/rng.hpp"
#include "rejectsvm/train.hpp"

namespace rsvm {

namespace {

const double kMuScale = 1.0 / std::sqrt(2.0);

double two_gaussian_eta(std::span<const double> x) {
  return 1.0 / (1.0 + std::exp(-2.0 * kMuScale * (x[0] + x[1])));
}

void draw_two_gaussian(Rng& rng, int label, std::span<double> x) {
  for (double& v : x) v = rng.normal();
  x[0] += label * kMuScale;
  x[1] += label * kMuScale;
}

// Draws the two informative coordinates and then coords[k] >= 2 only; eta
// depends on the first two alone.
void draw_two_gaussian_partial(Rng& rng, int label, std::span<double> x, std::span<const std::size_t> coords) {
  x[0] = rng.normal() + label * kMuScale;
  x[1] = rng.normal() + label * kMuScale;
  for (std::size_t j : coords) {
    if (j >= 2) x[j] = rng.normal();
  }
}

void draw_mixture(Rng& rng, const MixtureModel& model, int label, std::span<double> x) {
  const auto& centers = label > 0 ? model.positive_centers : model.negative_centers;
  const auto& c = centers[rng.below(centers.size())];
  const double sd = std::sqrt(model.variance);
  x[0] = c[0] + sd * rng.normal();
  x[1] = c[1] + sd * rng.normal();
}

// Writes one test point into x and returns its eta. Only the coordinates in
// `coords` need to be drawn when the source allows it.
using PointSource = std::function<double(Rng&, std::span<double>, std::span<const std::size_t>)>;

// Nonzero coefficients only; most fitted vectors are sparse.
struct SparseModel {
  std::vector<std::size_t> index;
  std::vector<double> value;

  explicit SparseModel(std::span<const double> lambda) {
    for (std::size_t j = 0; j < lambda.size(); ++j) {
      if (lambda[j] != 0.0) {
        index.push_back(j);
        value.push_back(lambda[j]);
      }
    }
  }
  double margin(std::span<const double> basis) const {
    double s = 0.0;
    for (std::size_t k = 0; k < index.size(); ++k) s += value[k] * basis[index[k]];
    return s;
  }
};

struct Scoring {
  double a;
  DecisionRule rule;
};

struct TestTotals {
  double phi = 0.0;
  double ell = 0.0;
  double misclass = 0.0;
  double misclass_closed = 0.0;  // Y f <= -tau
  double reject = 0.0;
};

struct TestSummary {
  std::vector<TestTotals> per_model;
  double bayes_mean = 0.0;
  double bayes_se = 0.0;
};

// Streams n test points and scores every model by conditional expectation
// over the label given eta(x).
TestSummary score_on_stream(const PointSource& source, std::size_t dim, const Dictionary& dict,
                            const std::vector<SparseModel>& models, const std::vector<Scoring>& scoring,
                            std::size_t n, double d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(dim);
  std::vector<double> basis(dict.size());
  std::vector<std::size_t> coords;
  if (dict.kind() == DictionaryKind::kLinear) {
    std::vector<bool> used(dim, false);
    for (const SparseModel& m : models) {
      for (std::size_t j : m.index) used[j] = true;
    }
    for (std::size_t j = 0; j < dim; ++j) {
      if (used[j]) coords.push_back(j);
    }
  } else {
    coords.resize(dim);
    std::iota(coords.begin(), coords.end(), std::size_t{0});
  }
  TestSummary out;
  out.per_model.resize(models.size());
  double bsum = 0.0;
  double bsq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double eta = source(rng, x, coords);
    dict.eval(x, basis);
    const double b = std::min({eta, 1.0 - eta, d});
    bsum += b;
    bsq += b * b;
    for (std::size_t k = 0; k < models.size(); ++k) {
      const double f = models[k].margin(basis);
      const Scoring& sc = scoring[k];
      TestTotals& t = out.per_model[k];
      t.phi += eta * gen_hinge(f, sc.a) + (1.0 - eta) * gen_hinge(-f, sc.a);
      t.ell += eta * reject_loss(f, sc.rule) + (1.0 - eta) * reject_loss(-f, sc.rule);
      t.misclass += eta * (f < -sc.rule.tau) + (1.0 - eta) * (-f < -sc.rule.tau);
      t.misclass_closed += eta * (f <= -sc.rule.tau) + (1.0 - eta) * (-f <= -sc.rule.tau);
      t.reject += std::abs(f) <= sc.rule.tau;
    }
  }
  const double nn = static_cast<double>(n);
  for (TestTotals& t : out.per_model) {
    t.phi /= nn;
    t.ell /= nn;
    t.misclass /= nn;
    t.misclass_closed /= nn;
    t.reject /= nn;
  }
  out.bayes_mean = bsum / nn;
  const double var = n > 1 ? std::max(0.0, (bsq - nn * out.bayes_mean * out.bayes_mean) / (nn - 1.0)) : 0.0;
  out.bayes_se = std::sqrt(var / nn);
  return out;
}

struct Scenario {
  LabeledSample train;
  Dictionary dict;
  PointSource source;
  std::size_t dim;
};

Scenario make_scenario(const ExperimentConfig& config, std::uint64_t seed) {
  if (config.n_train < 2 || config.n_train % 2 != 0) {
    throw ParameterError(fmt::format("n_train={} must be even and >= 2", config.n_train));
  }
  if (config.n_test == 0) throw ParameterError("n_test must be positive");
  const std::size_t half = config.n_train / 2;
  if (config.scenario == "two_gaussian") {
    const std::size_t m = config.m;
    PointSource source = [](Rng& rng, std::span<double> x, std::span<const std::size_t> coords) {
      draw_two_gaussian_partial(rng, rng.uniform() < 0.5 ? 1 : -1, x, coords);
      return two_gaussian_eta(x);
    };
    return {gen_two_gaussian(half, m, seed), Dictionary::linear(m), std::move(source), m};
  }
  if (config.scenario == "mixture") {
    const MixtureModel model = MixtureModel::standard();
    LabeledSample train = gen_mixture(half, seed, model);
    const auto [lo, hi] = bounding_box(train.x);
    Dictionary dict = Dictionary::rbf_lattice({10, 10}, lo, hi, 2.0);
    PointSource source = [model](Rng& rng, std::span<double> x, std::span<const std::size_t>) {
      draw_mixture(rng, model, rng.uniform() < 0.5 ? 1 : -1, x);
      return model.eta(x[0], x[1]);
    };
    return {std::move(train), std::move(dict), std::move(source), 2};
  }
  throw ParameterError(fmt::format("unknown scenario '{}'", config.scenario));
}

std::vector<double> grid_or_default(const ExperimentConfig& config, const CostParams& cp) {
  return config.r_grid.empty() ? default_r_grid(cp.a(), 1.0) : config.r_grid;
}

}  // namespace

LabeledSample gen_two_gaussian(std::size_t n_per_class, std::size_t m, std::uint64_t seed) {
  if (m < 2) throw ParameterError(fmt::format("two-Gaussian scenario needs M >= 2, got {}", m));
  Rng rng(seed);
  LabeledSample s;
  s.x = Matrix(2 * n_per_class, m);
  for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    draw_two_gaussian(rng, label, s.x.row(i));
    s.y.push_back(label);
    s.eta.push_back(two_gaussian_eta(s.x.row(i)));
  }
  return s;
}

LabeledSample sample_two_gaussian(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m < 2) throw ParameterError(fmt::format("two-Gaussian scenario needs M >= 2, got {}", m));
  Rng rng(seed);
  LabeledSample s;
  s.x = Matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = rng.uniform() < 0.5 ? 1 : -1;
    draw_two_gaussian(rng, label, s.x.row(i));
    s.y.push_back(label);
    s.eta.push_back(two_gaussian_eta(s.x.row(i)));
  }
  return s;
}

MixtureModel MixtureModel::standard() {
  MixtureModel m;
  m.positive_centers = {{2.03, 1.64}, {2.15, -0.97}, {-0.39, 0.07}, {1.86, 0.51}, {2.81, 0.75}};
  m.negative_centers = {{0.64, 0.27}, {-1.11, 2.48}, {0.05, 1.81}, {-1.38, 0.56}, {-1.29, 0.22}};
  m.variance = 0.2;
  return m;
}

double MixtureModel::class_density(double x1, double x2, int label) const {
  const auto& centers = label > 0 ? positive_centers : negative_centers;
  const double norm = 1.0 / (2.0 * M_PI * variance * static_cast<double>(centers.size()));
  double total = 0.0;
  for (const auto& c : centers) {
    const double d2 = (x1 - c[0]) * (x1 - c[0]) + (x2 - c[1]) * (x2 - c[1]);
    total += std::exp(-d2 / (2.0 * variance));
  }
  return norm * total;
}

double MixtureModel::density(double x1, double x2) const {
  return 0.5 * class_density(x1, x2, 1) + 0.5 * class_density(x1, x2, -1);
}

double MixtureModel::eta(double x1, double x2) const {
  const double pos = class_density(x1, x2, 1);
  const double neg = class_density(x1, x2, -1);
  const double total = pos + neg;
  return total > 0.0 ? pos / total : 0.5;
}

LabeledSample gen_mixture(std::size_t n_per_class, std::uint64_t seed, const MixtureModel& model) {
  Rng rng(seed);
  LabeledSample s;
  s.x = Matrix(2 * n_per_class, 2);
  for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    draw_mixture(rng, model, label, s.x.row(i));
    s.y.push_back(label);
    s.eta.push_back(model.eta(s.x(i, 0), s.x(i, 1)));
  }
  return s;
}

std::vector<ArmResult> run_reject_vs_plain(const ExperimentConfig& config) {
  const CostParams reject_cp(config.d, config.tau);
  const CostParams plain_cp(0.5);
  const std::vector<double> grid = grid_or_default(config, reject_cp);

  std::vector<ArmResult> rows;
  for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t rep_seed = derive_seed(config.seed, rep);
    Scenario sc = make_scenario(config, derive_seed(rep_seed, 0));
    const DesignMatrix phi = sc.dict.evaluate(sc.train.x, sc.train.y);

    std::vector<SparseModel> models;
    std::vector<Scoring> scoring;
    for (double r : grid) {
      models.emplace_back(fit_coefficients(phi, reject_cp, r).lambda);
      scoring.push_back({reject_cp.a(), DecisionRule::from(reject_cp)});
      models.emplace_back(fit_coefficients(phi, plain_cp, r).lambda);
      scoring.push_back({plain_cp.a(), DecisionRule{config.d, 0.0}});
    }
    const TestSummary test =
        score_on_stream(sc.source, sc.dim, sc.dict, models, scoring, config.n_test, config.d, derive_seed(rep_seed, 1));

    for (std::size_t g = 0; g < grid.size(); ++g) {
      for (std::size_t arm = 0; arm < 2; ++arm) {
        const TestTotals& t = test.per_model[2 * g + arm];
        rows.push_back({config.scenario, rep, grid[g], arm == 0 ? "reject" : "plain", t.phi, t.ell, t.misclass,
                        t.reject, t.ell - test.bayes_mean, test.bayes_mean, test.bayes_se});
      }
    }
  }
  return rows;
}

void write_arm_results(std::ostream& out, const std::vector<ArmResult>& rows) {
  out << "scenario,repetition,r,arm,phi_risk,ell_risk,misclass,reject,excess_ell,bayes_risk_mc,bayes_risk_se\n";
  for (const ArmResult& a : rows) {
    fmt::print(out, "{},{},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", a.scenario,
               a.repetition, a.r, a.arm, a.phi_risk, a.ell_risk, a.misclass, a.reject, a.excess_ell, a.bayes_risk_mc,
               a.bayes_risk_se);
  }
}

std::vector<CoverageRow> run_bound_coverage(const ExperimentConfig& config, double r, double delta, double p) {
  const CostParams cp(config.d, config.tau);
  const std::vector<double> gammas = default_gamma_grid();
  std::vector<CoverageRow> rows;
  for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t rep_seed = derive_seed(config.seed, rep);
    Scenario sc = make_scenario(config, derive_seed(rep_seed, 0));
    const DesignMatrix phi = sc.dict.evaluate(sc.train.x, sc.train.y);
    const Model model = fit(sc.dict, phi, cp, r);
    const BoundReport br = bounds(model, sc.train.x, sc.train.y, gammas, delta, p);
    const TestSummary test = score_on_stream(sc.source, sc.dim, sc.dict, {SparseModel(model.lambda)},
                                             {{cp.a(), DecisionRule::from(cp)}}, config.n_test, cp.d(),
                                             derive_seed(rep_seed, 1));
    const TestTotals& t = test.per_model.front();
    rows.push_back({rep, model.l1(), t.misclass_closed, br.misclass.value, t.reject, br.reject.value});
  }
  return rows;
}

void write_coverage(std::ostream& out, const std::vector<CoverageRow>& rows) {
  out << "repetition,l1,true_misclass,bound_misclass,true_reject,bound_reject\n";
  for (const CoverageRow& c : rows) {
    fmt::print(out, "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", c.repetition, c.l1, c.true_misclass,
               c.bound_misclass, c.true_reject, c.bound_reject);
  }
}

BoundaryResult run_mixture_boundaries(const ExperimentConfig& config, std::size_t lattice_side,
                                      std::size_t grid_side) {
  if (lattice_side == 0 || grid_side == 0) throw ParameterError("lattice and grid sizes must be positive");
  if (config.n_train < 20 || config.n_train % 2 != 0) {
    throw ParameterError(fmt::format("n_train={} must be even and >= 20 for tenfold CV", config.n_train));
  }
  const CostParams cp(config.d, config.tau);
  const MixtureModel truth = MixtureModel::standard();
  const LabeledSample train = gen_mixture(config.n_train / 2, derive_seed(config.seed, 0), truth);
  const auto [lo, hi] = bounding_box(train.x);
  const Dictionary dict = Dictionary::rbf_lattice({lattice_side, lattice_side}, lo, hi, 2.0);
  const DesignMatrix phi = dict.evaluate(train.x, train.y);
  const std::vector<double> grid = grid_or_default(config, cp);
  const CvResult cv = cross_validate(phi, cp, grid, 10, derive_seed(config.seed, 1));
  const Model model = fit(dict, phi, cp, cv.best_r);

  BoundaryResult res;
  res.cv_r = cv.best_r;
  std::vector<double> x(2);
  for (std::size_t i = 0; i < grid_side; ++i) {
    for (std::size_t j = 0; j < grid_side; ++j) {
      x[0] = lo[0] + (hi[0] - lo[0]) * (static_cast<double>(i) + 0.5) / static_cast<double>(grid_side);
      x[1] = lo[1] + (hi[1] - lo[1]) * (static_cast<double>(j) + 0.5) / static_cast<double>(grid_side);
      BoundaryCell cell;
      cell.x1 = x[0];
      cell.x2 = x[1];
      cell.density = truth.density(x[0], x[1]);
      cell.eta = truth.eta(x[0], x[1]);
      cell.margin = model.margin(x);
      cell.estimated = decide(cell.margin, cp.tau());
      cell.optimal = bayes_rule(cell.eta, cp);
      res.reject_cells += cell.estimated == 0;
      res.cells.push_back(cell);
    }
  }
  std::vector<double> dens;
  for (const BoundaryCell& c : res.cells) dens.push_back(c.density);
  std::nth_element(dens.begin(), dens.begin() + static_cast<std::ptrdiff_t>(dens.size() / 2), dens.end());
  const double median = dens[dens.size() / 2];
  std::size_t dense = 0;
  std::size_t agree = 0;
  for (const BoundaryCell& c : res.cells) {
    if (c.density <= median) continue;
    ++dense;
    agree += c.estimated == c.optimal;
  }
  res.agreement_dense = dense > 0 ? static_cast<double>(agree) / static_cast<double>(dense) : 0.0;
  return res;
}

void write_boundaries(std::ostream& out, const BoundaryResult& result) {
  out << "x1,x2,density,eta,margin,estimated,optimal\n";
  for (const BoundaryCell& c : result.cells) {
    fmt::print(out, "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n", c.x1, c.x2, c.density, c.eta, c.margin,
               c.estimated, c.optimal);
  }
}

}  // namespace rsvm
