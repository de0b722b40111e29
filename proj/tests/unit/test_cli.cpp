#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "hinge_oracle.hpp"
#include "rejectsvm/io.hpp"

using namespace rsvm;
namespace fs = std::filesystem;

namespace {

const std::string kData = RSVM_TEST_DATA;

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "rsvm_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the CLI with args, stdout and stderr captured to files; returns the exit code.
int run(const std::string& args, std::string* out = nullptr) {
  const fs::path log = work_dir() / "stdout.txt";
  const std::string cmd = std::string("env -u RSVM_SEED ") + RSVM_CLI + " " + args + " > " + log.string() + " 2>" +
                          (work_dir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream in(log);
    *out = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string tmp(const std::string& name) { return (work_dir() / name).string(); }

}  // namespace

TEST_CASE("train on the six-row fixture reaches the exact optimum") {
  REQUIRE(run("train --data " + kData + "/six.csv --dict const_linear --r 0.05 --out " + tmp("six.model")) == 0);
  const Model model = load_model(tmp("six.model"));
  const Dataset ds = read_dataset(kData + "/six.csv", true);
  const DesignMatrix dm = Dictionary::constant_linear(2).evaluate(ds.x, ds.y);
  const double oracle = testing::arrangement_minimum(dm, 3.0, 0.05);
  CHECK(model.meta.objective == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(model.meta.objective == doctest::Approx(0.1131336406).epsilon(1e-9));
  CHECK(model.l1() <= 1.0 / 0.05);
  CHECK(model.dict.sup_norm().value == 1.5);

  REQUIRE(run("train --data " + kData + "/six.csv --dict const_linear --r 0.05 --out " + tmp("six2.model")) == 0);
  CHECK(slurp(tmp("six.model")) == slurp(tmp("six2.model")));
}

TEST_CASE("predict, eval and bounds") {
  REQUIRE(run("train --data " + kData + "/six.csv --dict const_linear --r 0.05 --out " + tmp("p.model")) == 0);
  std::string out;
  REQUIRE(run("predict --model " + tmp("p.model") + " --data " + kData + "/six.csv", &out) == 0);
  CHECK(out.rfind("margin,decision\n", 0) == 0);
  CHECK(std::count(out.begin(), out.end(), '\n') == 7);

  REQUIRE(run("eval --model " + tmp("p.model") + " --data " + kData + "/six.csv --out " + tmp("eval.csv")) == 0);
  std::istringstream rows(slurp(tmp("eval.csv")));
  std::string header;
  std::string line;
  std::getline(rows, header);
  std::getline(rows, line);
  CHECK(header == "n_eval,phi_risk,ell_risk,misclass_rate,reject_rate,excess_ell");
  CHECK(line.rfind("6,", 0) == 0);

  REQUIRE(run("train --data " + kData + "/six.csv --dict const_linear --r 10 --out " + tmp("zero.model")) == 0);
  REQUIRE(run("predict --model " + tmp("zero.model") + " --data " + kData + "/six.csv", &out) == 0);
  std::istringstream pred(out);
  std::getline(pred, header);
  while (std::getline(pred, line)) CHECK(line.substr(line.find(',')) == ",0");

  REQUIRE(run("bounds --model " + tmp("zero.model") + " --data " + kData + "/six.csv --p 1 --out " + tmp("b.csv")) == 0);
  const std::string bounds = slurp(tmp("b.csv"));
  CHECK(bounds.find("misclass,") != std::string::npos);
  std::istringstream brows(bounds);
  std::getline(brows, header);
  std::getline(brows, line);
  std::vector<std::string> cells;
  std::stringstream ls(line);
  for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
  REQUIRE(cells.size() == 9);
  CHECK(std::stod(cells[5]) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("exit codes") {
  CHECK(run("") == 2);
  CHECK(run("train --data " + kData + "/six.csv --dict poly --r 0.1 --out " + tmp("x.model")) == 2);
  CHECK(run("train --data " + kData + "/six.csv --r 0.1 --cv --out " + tmp("x.model")) == 2);
  CHECK(run("train --data " + kData + "/six.csv --dict linear --d 0.7 --r 0.1 --out " + tmp("x.model")) == 5);
  CHECK(run("train --data " + kData + "/missing.csv --dict linear --r 0.1 --out " + tmp("x.model")) == 3);
  CHECK(run("train --data " + kData + "/six.csv --dict linear --r -1 --out " + tmp("x.model")) == 5);

  std::ofstream(tmp("wide.csv")) << "a,b,c,y\n1,2,3,1\n";
  REQUIRE(run("train --data " + kData + "/six.csv --dict linear --r 0.1 --out " + tmp("lin.model")) == 0);
  CHECK(run("predict --model " + tmp("lin.model") + " --data " + tmp("wide.csv")) == 3);
  std::ofstream(tmp("broken.model")) << "rejectsvm-model 1\ndictionary linear\n";
  CHECK(run("predict --model " + tmp("broken.model") + " --data " + kData + "/six.csv") == 3);
  CHECK(run("train --data " + kData + "/six.csv --dict linear --r 0 --out " + tmp("r0.model")) == 0);
}

TEST_CASE("diagnose reports the plateau") {
  std::string out;
  CHECK(run("diagnose --dist " + kData + "/plateau_dist.csv --checks plateau,prop21,psi", &out) == 0);
  CHECK(out.find("plateau,pass,") != std::string::npos);
  CHECK(out.find("plateau verified") != std::string::npos);
  CHECK(out.find("prop21_b,pass") != std::string::npos);
  CHECK(run("diagnose --dist " + kData + "/plateau_dist.csv --checks nonsense") == 2);
}

TEST_CASE("same seed gives identical bytes") {
  std::ofstream(tmp("cfg.json")) << R"({"n_train": 30, "n_test": 500, "m": 8, "r_grid": [0.01, 0.1], "repetitions": 2})";
  const std::string base = "simulate --scenario two_gaussian --config " + tmp("cfg.json") + " --seed 11 --out ";
  REQUIRE(run(base + tmp("s1.csv")) == 0);
  REQUIRE(run(base + tmp("s2.csv")) == 0);
  CHECK(slurp(tmp("s1.csv")) == slurp(tmp("s2.csv")));
  CHECK_FALSE(slurp(tmp("s1.csv")).empty());
  REQUIRE(run("simulate --scenario two_gaussian --config " + tmp("cfg.json") + " --seed 12 --out " + tmp("s3.csv")) == 0);
  CHECK(slurp(tmp("s1.csv")) != slurp(tmp("s3.csv")));

  const std::string cv = "train --data " + kData + "/six.csv --dict const_linear --cv --folds 3 --seed 4 --out ";
  REQUIRE(run(cv + tmp("cv1.model") + " --cv-out " + tmp("cv1.csv")) == 0);
  REQUIRE(run(cv + tmp("cv2.model") + " --cv-out " + tmp("cv2.csv")) == 0);
  CHECK(slurp(tmp("cv1.model")) == slurp(tmp("cv2.model")));
  CHECK(slurp(tmp("cv1.csv")) == slurp(tmp("cv2.csv")));
}
