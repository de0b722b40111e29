#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rejectsvm/errors.hpp"
#include "rejectsvm/io.hpp"

using namespace rsvm;

namespace {

Dataset parse(const std::string& text, bool require_labels = true) {
  std::istringstream in(text);
  return parse_dataset(in, require_labels);
}

std::string dump(const Model& model) {
  std::ostringstream out;
  write_model(out, model);
  return out.str();
}

Model sample_model(const Dictionary& dict) {
  std::vector<double> lambda(dict.size());
  for (std::size_t j = 0; j < lambda.size(); ++j) lambda[j] = (j % 3 == 0) ? 0.0 : 1.0 / (3.0 + j) - 0.1 * j;
  return Model{lambda, dict.with_sup_norm({1.0 / 3.0, true}), CostParams(0.2, 0.45), 0.0123, {7, 0.1 / 3.0, 42}};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("dataset parsing") {
  const Dataset ds = parse("a,y,b\n1.5,1,-2\n0,-1,3e-1\n");
  CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(ds.x.rows() == 2);
  CHECK(ds.x(0, 1) == -2.0);
  CHECK(ds.x(1, 1) == 0.3);
  CHECK(ds.y == std::vector<int>{1, -1});

  const Dataset unlabeled = parse("a,b\n1,2\n", false);
  CHECK(unlabeled.y.empty());
  CHECK(unlabeled.x.cols() == 2);

  CHECK_THROWS_AS(parse("a,b\n1,2\n"), DataError);
  CHECK_THROWS_AS(parse("a,y\n1,0\n"), DataError);
  CHECK_THROWS_AS(parse("a,y\n1,2\n"), DataError);
  CHECK_THROWS_AS(parse("a,y\nfoo,1\n"), DataError);
  CHECK_THROWS_AS(parse("a,y\n,1\n"), DataError);
  CHECK_THROWS_AS(parse("a,y\n1,1,3\n"), DataError);
  CHECK_THROWS_AS(parse("a,y\nnan,1\n"), DataError);
  CHECK_THROWS_AS(read_dataset("/nonexistent/file.csv", true), DataError);

  const Dataset six = read_dataset(RSVM_TEST_DATA "/six.csv", true);
  CHECK(six.x.rows() == 6);
  CHECK(six.y == std::vector<int>{1, 1, 1, -1, -1, -1});
}

TEST_CASE("distribution parsing") {
  const DiscreteDistribution dist = read_distribution(RSVM_TEST_DATA "/plateau_dist.csv");
  CHECK(dist.atoms.size() == 3);
  CHECK(dist.atoms[2].eta == 0.9);
  CHECK(dist.atoms[0].x == std::vector<double>{-1.0});
  std::istringstream bad("p,eta,x\n0.5,0.2,1\n0.4,0.3,2\n");
  CHECK_THROWS_AS(parse_distribution(bad), DataError);
  std::istringstream bad_eta("p,eta,x\n1,1.2,1\n");
  CHECK_THROWS_AS(parse_distribution(bad_eta), DataError);
}

TEST_CASE("dictionary specs") {
  Matrix rows(2, 2);
  rows(0, 0) = -1.0;
  rows(0, 1) = 0.0;
  rows(1, 0) = 3.0;
  rows(1, 1) = 2.0;
  CHECK(parse_dictionary_spec("linear", rows).kind() == DictionaryKind::kLinear);
  CHECK(parse_dictionary_spec("const_linear", rows).size() == 3);
  CHECK(parse_dictionary_spec("constant", rows).size() == 1);

  const Dictionary rbf = parse_dictionary_spec("rbf:3x2", rows);
  CHECK(rbf.size() == 6);
  CHECK(rbf.lower() == std::vector<double>{-1.0, 0.0});
  CHECK(rbf.upper() == std::vector<double>{3.0, 2.0});
  CHECK(rbf.bandwidth() == 2.0);

  const Dictionary boxed = parse_dictionary_spec("rbf:2x2:beta=0.5:box=0,0,1,4", rows);
  CHECK(boxed.bandwidth() == 0.5);
  CHECK(boxed.upper() == std::vector<double>{1.0, 4.0});

  const auto centers = temp_file("rsvm_test_centers.csv", "0,0\n1,2\n-1,0.5\n");
  const Dictionary custom = parse_dictionary_spec("custom:" + centers.string() + ":beta=1", rows);
  CHECK(custom.size() == 3);
  CHECK(custom.centers()(1, 1) == 2.0);
  CHECK(custom.bandwidth() == 1.0);

  CHECK_THROWS_AS(parse_dictionary_spec("poly", rows), UsageError);
  CHECK_THROWS_AS(parse_dictionary_spec("rbf", rows), UsageError);
  CHECK_THROWS_AS(parse_dictionary_spec("rbf:3", rows), UsageError);
  CHECK_THROWS_AS(parse_dictionary_spec("rbf:3x0", rows), UsageError);
  CHECK_THROWS_AS(parse_dictionary_spec("rbf:3x3:gamma=1", rows), UsageError);
  CHECK_THROWS_AS(parse_dictionary_spec("rbf:3x3:box=0,1", rows), UsageError);
  CHECK_THROWS_AS(parse_dictionary_spec("linear:2", rows), UsageError);
  CHECK_THROWS_AS(parse_dictionary_spec("custom:", rows), UsageError);
}

TEST_CASE("model files round trip byte for byte") {
  Matrix rows(2, 2);
  rows(1, 0) = 1.0;
  rows(1, 1) = 1.0;
  Matrix centers(2, 2);
  centers(0, 0) = 0.1;
  centers(1, 1) = -7.25;
  const std::vector<Dictionary> dicts{Dictionary::linear(2), Dictionary::constant_linear(2), Dictionary::constant(2),
                                      Dictionary::rbf_lattice({3, 2}, {-0.3, 0.0}, {1.7, 2.0 / 3.0}, 1.5),
                                      Dictionary::custom_rbf(centers, 0.7)};
  for (const Dictionary& dict : dicts) {
    const Model model = sample_model(dict);
    const std::string text = dump(model);
    std::istringstream in(text);
    const Model back = parse_model(in);
    CHECK(dump(back) == text);
    CHECK(back.lambda == model.lambda);
    CHECK(back.dict.kind() == dict.kind());
    CHECK(back.cp.tau() == 0.45);
    CHECK(back.r == 0.0123);
    CHECK(back.dict.sup_norm().value == 1.0 / 3.0);
    CHECK(back.margin(rows.row(1)) == model.margin(rows.row(1)));
  }

  const auto path = std::filesystem::temp_directory_path() / "rsvm_test_model.txt";
  save_model(path, sample_model(dicts[3]));
  CHECK(dump(load_model(path)) == dump(sample_model(dicts[3])));
}

TEST_CASE("corrupt model files are rejected") {
  const std::string text = dump(sample_model(Dictionary::linear(2)));
  const auto tamper = [&](const std::string& from, const std::string& to) {
    std::string copy = text;
    const auto pos = copy.find(from);
    REQUIRE(pos != std::string::npos);
    copy.replace(pos, from.size(), to);
    std::istringstream in(copy);
    return parse_model(in);
  };
  CHECK_THROWS_AS(tamper("\na 4\n", "\na 3.5\n"), DataError);
  CHECK_THROWS_AS(tamper("rejectsvm-model 1", "rejectsvm-model 2"), DataError);
  CHECK_THROWS_AS(tamper("dictionary linear", "dictionary spline"), DataError);
  CHECK_THROWS_AS(tamper("lambda 2", "lambda 3"), DataError);
  CHECK_THROWS_AS(tamper("\nd 0.2", "\nd 0.7"), DataError);
  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(parse_model(truncated), DataError);
}

TEST_CASE("csv writers") {
  std::ostringstream pred;
  const std::vector<double> margins{0.25, -1.0};
  const std::vector<int> decisions{0, -1};
  write_predictions(pred, margins, decisions);
  CHECK(pred.str() == "margin,decision\n0.25,0\n-1,-1\n");

  std::ostringstream risk;
  RiskReport rep;
  rep.n_eval = 4;
  rep.ell_risk = 0.25;
  write_risk_report(risk, rep);
  CHECK(risk.str().rfind("n_eval,phi_risk,ell_risk,misclass_rate,reject_rate,excess_ell\n4,", 0) == 0);

  std::ostringstream bounds;
  write_bound_report(bounds, BoundReport{});
  CHECK(bounds.str().rfind("bound,gamma,empirical,penalty,tail,value,l1,delta,p\n", 0) == 0);

  std::ostringstream cv;
  write_cv_table(cv, CvResult{0.1, {{0.1, 0.2, 0.01}, {1.0, 0.3, 0.02}}});
  CHECK(cv.str().rfind("r,mean_ell,fold_se,selected\n", 0) == 0);

  std::ostringstream checks;
  const std::vector<CheckRow> rows{{"psi", CheckStatus::kPass, 0.5, "min eig, 0.5"}};
  write_check_rows(checks, rows);
  CHECK(checks.str().rfind("name,status,slack,witness\n", 0) == 0);
  CHECK(checks.str().find("\"min eig, 0.5\"") != std::string::npos);
}
