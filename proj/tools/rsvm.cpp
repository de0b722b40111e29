// rsvm: train, apply and inspect l1-penalized SVMs with a reject option.

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "rejectsvm/errors.hpp"
#include "rejectsvm/evaluate.hpp"
#include "rejectsvm/io.hpp"
#include "rejectsvm/sim.hpp"
#include "rejectsvm/theory_lab.hpp"
#include "rejectsvm/train.hpp"

namespace {

using namespace rsvm;

enum ExitCode { kOk = 0, kCheckFailed = 1, kUsage = 2, kData = 3, kNumerical = 4, kParameter = 5 };

std::uint64_t default_seed() {
  if (const char* env = std::getenv("RSVM_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("RSVM_SEED='{}' is not an unsigned integer", env));
    }
  }
  return 1;
}

// Writes through `emit` to the file at path, or to stdout when path is empty.
template <typename Emit>
void write_output(const std::string& path, Emit&& emit) {
  if (path.empty()) {
    emit(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path));
  emit(out);
}

struct TrainArgs {
  std::string data;
  std::string dict = "linear";
  double d = 0.25;
  std::optional<double> tau;
  std::optional<double> r;
  bool cv = false;
  std::size_t folds = 10;
  std::size_t grid_count = 30;
  std::string cv_out;
  std::string out;
  std::string dump;
};

int cmd_train(const TrainArgs& args, std::uint64_t seed) {
  const Dataset ds = read_dataset(args.data, true);
  const Dictionary dict = parse_dictionary_spec(args.dict, ds.x);
  const CostParams cp = args.tau ? CostParams(args.d, *args.tau) : CostParams(args.d);
  const DesignMatrix phi = dict.evaluate(ds.x, ds.y);

  double r = 0.0;
  if (args.cv) {
    const Dictionary sized = dict.with_estimated_sup_norm(phi);
    const std::vector<double> grid = default_r_grid(cp.a(), sized.sup_norm().value, args.grid_count);
    const CvResult cv = cross_validate(phi, cp, grid, args.folds, seed);
    r = cv.best_r;
    if (!args.cv_out.empty()) write_output(args.cv_out, [&](std::ostream& o) { write_cv_table(o, cv); });
  } else {
    r = *args.r;
    if (r == 0.0) fmt::print(std::cerr, "warning: r = 0 fits the unpenalized LP\n");
  }

  lp::SolveOptions options;
  if (!args.dump.empty()) options.tableau_dump = args.dump;
  const Model model = fit(dict, phi, cp, r, options);
  save_model(args.out, model);
  fmt::print("n {}\nM {}\nr {:.6g}\nl1 {:.6g}\nobjective {:.10g}\nsupport {}\nC_F {:.6g} ({})\n", model.meta.n,
             model.lambda.size(), model.r, model.l1(), model.meta.objective, model.support_size(),
             model.dict.sup_norm().value, model.dict.sup_norm().estimated ? "estimated" : "declared");
  return kOk;
}

void check_dimension(const Model& model, const Dataset& ds) {
  if (ds.x.cols() != model.dict.input_dim()) {
    throw DataError(fmt::format("data has {} features, model expects {}", ds.x.cols(), model.dict.input_dim()));
  }
}

int cmd_predict(const std::string& model_path, const std::string& data, const std::string& out) {
  const Model model = load_model(model_path);
  const Dataset ds = read_dataset(data, false);
  check_dimension(model, ds);
  const std::vector<double> f = model.margins(ds.x);
  std::vector<int> decisions;
  for (double v : f) decisions.push_back(decide(v, model.cp.tau()));
  write_output(out, [&](std::ostream& o) { write_predictions(o, f, decisions); });
  return kOk;
}

int cmd_eval(const std::string& model_path, const std::string& data, const std::string& out) {
  const Model model = load_model(model_path);
  const Dataset ds = read_dataset(data, true);
  check_dimension(model, ds);
  const RiskReport rep = risk_report(model, ds.x, ds.y);
  if (!out.empty()) write_output(out, [&](std::ostream& o) { write_risk_report(o, rep); });
  fmt::print("n_eval {}\nphi_risk {:.6g}\nell_risk {:.6g}\nmisclass_rate {:.6g}\nreject_rate {:.6g}\n", rep.n_eval,
             rep.phi_risk, rep.ell_risk, rep.misclass_rate, rep.reject_rate);
  return kOk;
}

int cmd_bounds(const std::string& model_path, const std::string& data, double delta, double p,
               const std::string& out) {
  const Model model = load_model(model_path);
  const Dataset ds = read_dataset(data, true);
  check_dimension(model, ds);
  const BoundReport rep = bounds(model, ds.x, ds.y, default_gamma_grid(), delta, p);
  if (!out.empty()) write_output(out, [&](std::ostream& o) { write_bound_report(o, rep); });
  fmt::print("misclass_bound {:.6g} (gamma {:.4g}, empirical {:.4g}, penalty {:.4g})\n", rep.misclass.value,
             rep.misclass.gamma, rep.misclass.empirical, rep.misclass.penalty);
  fmt::print("reject_bound {:.6g} (gamma {:.4g}, empirical {:.4g}, penalty {:.4g})\n", rep.reject.value,
             rep.reject.gamma, rep.reject.empirical, rep.reject.penalty);
  fmt::print("tail {:.6g}\n", rep.tail);
  return kOk;
}

struct SimArgs {
  std::string scenario = "two_gaussian";
  std::string config;
  std::optional<std::size_t> repetitions;
  std::optional<std::size_t> n_test;
  double r = 0.05;
  double delta = 0.1;
  double p = 1.0;
  std::string out;
};

ExperimentConfig load_config(const SimArgs& args, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  if (!args.config.empty()) {
    std::ifstream in(args.config);
    if (!in) throw DataError(fmt::format("cannot open '{}'", args.config));
    nlohmann::json j;
    try {
      in >> j;
      cfg.n_train = j.value("n_train", cfg.n_train);
      cfg.n_test = j.value("n_test", cfg.n_test);
      cfg.m = j.value("m", cfg.m);
      cfg.d = j.value("d", cfg.d);
      cfg.tau = j.value("tau", cfg.tau);
      cfg.r_grid = j.value("r_grid", cfg.r_grid);
      cfg.repetitions = j.value("repetitions", cfg.repetitions);
      cfg.seed = j.value("seed", cfg.seed);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(fmt::format("{}: {}", args.config, e.what()));
    }
  }
  if (args.repetitions) cfg.repetitions = *args.repetitions;
  if (args.n_test) cfg.n_test = *args.n_test;
  return cfg;
}

int cmd_simulate(const SimArgs& args, std::uint64_t seed) {
  ExperimentConfig cfg = load_config(args, seed);
  if (args.scenario == "two_gaussian" || args.scenario == "mixture_arms") {
    cfg.scenario = args.scenario == "two_gaussian" ? "two_gaussian" : "mixture";
    const auto rows = run_reject_vs_plain(cfg);
    write_output(args.out, [&](std::ostream& o) { write_arm_results(o, rows); });
    return kOk;
  }
  if (args.scenario == "coverage") {
    cfg.scenario = "two_gaussian";
    const auto rows = run_bound_coverage(cfg, args.r, args.delta, args.p);
    std::size_t covered = 0;
    for (const auto& row : rows) covered += row.true_misclass <= row.bound_misclass;
    write_output(args.out, [&](std::ostream& o) { write_coverage(o, rows); });
    fmt::print(std::cerr, "covered {}/{}\n", covered, rows.size());
    return kOk;
  }
  if (args.scenario == "mixture") {
    if (args.config.empty()) cfg.n_train = 200;
    const BoundaryResult res = run_mixture_boundaries(cfg);
    write_output(args.out, [&](std::ostream& o) { write_boundaries(o, res); });
    fmt::print(std::cerr, "cv r {:.6g}, agreement on dense cells {:.3f}, reject cells {}\n", res.cv_r,
               res.agreement_dense, res.reject_cells);
    return kOk;
  }
  throw UsageError(fmt::format("unknown scenario '{}'", args.scenario));
}

struct DiagArgs {
  std::string dist;
  std::string dict = "const_linear";
  double d = 0.25;
  std::optional<double> tau;
  std::vector<std::string> checks = {"psi", "kappa", "complexity", "lemma", "domination", "prop21", "plateau"};
  std::size_t samples = 500;
  std::string out;
};

int cmd_diagnose(const DiagArgs& args, std::uint64_t seed) {
  const DiscreteDistribution dist = read_distribution(args.dist);
  Matrix rows;
  for (const Atom& atom : dist.atoms) rows.append_row(atom.x);
  const Dictionary dict = parse_dictionary_spec(args.dict, rows);
  const CostParams cp = args.tau ? CostParams(args.d, *args.tau) : CostParams(args.d);
  const std::vector<double> t_grid = default_t_grid();
  const Matrix psi = gram_psi(dist, dict);
  const Model base = fit_population(dist, dict, cp, 0.0);
  double c_f = 0.0;
  const DesignMatrix atoms = dict.evaluate(rows);
  for (double v : atoms.phi.data()) c_f = std::max(c_f, std::abs(v));
  const std::vector<double> r_grid = log_grid(1e-4, std::max(cp.a() * c_f, 2e-4), 20);

  std::vector<CheckRow> out;
  for (const std::string& check : args.checks) {
    if (check == "psi") {
      out.push_back(check_psi(psi));
    } else if (check == "kappa") {
      CheckRow row{"kappa", CheckStatus::kSkipped, 0.0, "lambda(0) = 0"};
      if (base.support_size() > 0) {
        const KappaEstimate k = kappa_estimate(psi, base.lambda, 1.0, 2000, seed);
        std::ostringstream delta;
        for (double v : k.delta) delta << fmt::format("{:.6g} ", v);
        row = {"kappa", CheckStatus::kPass, k.kappa2, fmt::format("upper estimate of kappa^2; delta={}", delta.str())};
      }
      out.push_back(row);
    } else if (check == "complexity") {
      const Complexity cx = complexity_estimate(dist, cp.d(), t_grid);
      out.push_back({"complexity", CheckStatus::kPass, cx.alpha,
                     fmt::format("alpha={} A={:.6g} gap={:.6g}", cx.alpha, cx.a_const, cx.gap)});
    } else if (check == "lemma") {
      const Complexity cx = complexity_estimate(dist, cp.d(), t_grid);
      const double scale = 2.0 * std::max(1.0, l1_norm(base.lambda));
      out.push_back(check_lemma_a1(dist, dict, cp, cx, random_lambdas(args.samples, dict.size(), scale, seed)));
    } else if (check == "domination") {
      auto fs = random_lambdas(args.samples, dist.atoms.size(), 2.0, seed);
      fs.push_back(bayes_values(dist, cp));
      fs.push_back(std::vector<double>(dist.atoms.size(), 0.0));
      out.push_back(check_excess_domination(dist, cp, fs));
    } else if (check == "prop21") {
      for (CheckRow& row : check_prop21(dist, dict, cp, r_grid)) out.push_back(std::move(row));
    } else if (check == "plateau") {
      CheckRow row = check_plateau(dist, dict, cp, r_grid, t_grid);
      if (row.status == CheckStatus::kPass) row.witness = "plateau verified; " + row.witness;
      out.push_back(std::move(row));
    } else {
      throw UsageError(fmt::format("unknown check '{}'", check));
    }
  }
  write_output(args.out, [&](std::ostream& o) { write_check_rows(o, out); });
  if (!args.out.empty()) {
    for (const CheckRow& row : out) fmt::print("{:<18} {:<8} {}\n", row.name, to_string(row.status), row.witness);
  }
  bool failed = false;
  for (const CheckRow& row : out) failed |= row.status == CheckStatus::kFail;
  return failed ? kCheckFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l1-penalized support vector machines with a reject option"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "Random seed (default: $RSVM_SEED or 1)");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Fit a model on a labeled CSV file");
  train_cmd->add_option("--data", train.data, "Training CSV with a 'y' column")->required();
  train_cmd->add_option("--dict", train.dict, "linear | const_linear | constant | rbf:KxL[:beta=B][:box=...] | custom:FILE");
  train_cmd->add_option("--d", train.d, "Rejection cost in (0, 0.5]");
  train_cmd->add_option("--tau", train.tau, "Reject threshold in [d, 1-d] (default 0.5 clipped)");
  auto* r_opt = train_cmd->add_option("--r", train.r, "Penalty weight");
  auto* cv_opt = train_cmd->add_flag("--cv", train.cv, "Choose r by cross-validation");
  r_opt->excludes(cv_opt);
  train_cmd->add_option("--folds", train.folds, "Cross-validation folds");
  train_cmd->add_option("--grid-count", train.grid_count, "Points in the r grid for --cv");
  train_cmd->add_option("--cv-out", train.cv_out, "Write the CV table here");
  train_cmd->add_option("--out", train.out, "Model file to write")->required();
  train_cmd->add_option("--dump-tableau", train.dump, "Write the initial simplex tableau to this file");
  train_cmd->add_option("--seed", seed_flag, "Random seed");

  std::string model_path;
  std::string data_path;
  std::string out_path;
  auto* predict_cmd = app.add_subcommand("predict", "Margins and decisions for every row");
  predict_cmd->add_option("--model", model_path)->required();
  predict_cmd->add_option("--data", data_path)->required();
  predict_cmd->add_option("--out", out_path, "CSV output (default stdout)");

  auto* eval_cmd = app.add_subcommand("eval", "Risk report on labeled data");
  eval_cmd->add_option("--model", model_path)->required();
  eval_cmd->add_option("--data", data_path)->required();
  eval_cmd->add_option("--out", out_path, "CSV output");

  double delta = 0.05;
  double p = 1.0;
  auto* bounds_cmd = app.add_subcommand("bounds", "Data-driven bounds on the error and reject rates");
  bounds_cmd->add_option("--model", model_path)->required();
  bounds_cmd->add_option("--data", data_path, "The training data of the model")->required();
  bounds_cmd->add_option("--delta", delta, "Confidence level parameter in (0, 1)");
  bounds_cmd->add_option("--p", p, "Exponent of the n^-p term, >= 1");
  bounds_cmd->add_option("--out", out_path, "CSV output");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation study");
  sim_cmd->add_option("--scenario", sim.scenario, "two_gaussian | mixture | mixture_arms | coverage");
  sim_cmd->add_option("--config", sim.config, "JSON file with ExperimentConfig fields");
  sim_cmd->add_option("--repetitions", sim.repetitions);
  sim_cmd->add_option("--n-test", sim.n_test);
  sim_cmd->add_option("--r", sim.r, "Penalty weight for the coverage scenario");
  sim_cmd->add_option("--delta", sim.delta, "delta for the coverage scenario");
  sim_cmd->add_option("--p", sim.p, "p for the coverage scenario");
  sim_cmd->add_option("--out", sim.out, "CSV output (default stdout)");
  sim_cmd->add_option("--seed", seed_flag, "Random seed");

  DiagArgs diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "Population-level checks on a finite-support distribution");
  diag_cmd->add_option("--dist", diag.dist, "CSV with columns p, eta, features")->required();
  diag_cmd->add_option("--dict", diag.dict, "Dictionary spec");
  diag_cmd->add_option("--d", diag.d, "Rejection cost");
  diag_cmd->add_option("--tau", diag.tau, "Reject threshold");
  diag_cmd->add_option("--checks", diag.checks, "psi kappa complexity lemma domination prop21 plateau")->delimiter(',');
  diag_cmd->add_option("--samples", diag.samples, "Random vectors per sampled check");
  diag_cmd->add_option("--out", diag.out, "CSV output (default stdout)");
  diag_cmd->add_option("--seed", seed_flag, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const std::uint64_t seed = seed_flag ? *seed_flag : default_seed();
    if (train_cmd->parsed()) {
      if (!train.cv && !train.r) throw UsageError("train needs --r or --cv");
      return cmd_train(train, seed);
    }
    if (predict_cmd->parsed()) return cmd_predict(model_path, data_path, out_path);
    if (eval_cmd->parsed()) return cmd_eval(model_path, data_path, out_path);
    if (bounds_cmd->parsed()) return cmd_bounds(model_path, data_path, delta, p, out_path);
    if (sim_cmd->parsed()) return cmd_simulate(sim, seed);
    if (diag_cmd->parsed()) return cmd_diagnose(diag, seed);
  } catch (const UsageError& e) {
    fmt::print(std::cerr, "usage error: {}\n", e.what());
    return kUsage;
  } catch (const DataError& e) {
    fmt::print(std::cerr, "data error: {}\n", e.what());
    return kData;
  } catch (const StructuralError& e) {
    fmt::print(std::cerr, "data error: {}\n", e.what());
    return kData;
  } catch (const NumericalFailure& e) {
    fmt::print(std::cerr, "numerical failure: {}\n", e.what());
    return kNumerical;
  } catch (const ParameterError& e) {
    fmt::print(std::cerr, "parameter error: {}\n", e.what());
    return kParameter;
  }
  return kUsage;
}
