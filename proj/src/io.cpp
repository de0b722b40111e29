#include "rejectsvm/io.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>

#include "rejectsvm/errors.hpp"

namespace rsvm {

namespace {

constexpr std::string_view kModelMagic = "rejectsvm-model";
constexpr int kModelVersion = 1;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

double to_double(std::string_view s, std::string_view where) {
  double v = 0.0;
  if (!parse_double(s, v)) throw DataError(fmt::format("{}: '{}' is not a finite number", where, s));
  return v;
}

std::size_t to_size(std::string_view s, std::string_view where) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(fmt::format("{}: '{}' is not a non-negative integer", where, s));
  }
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

// Header plus rectangular numeric body.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table parse_table(std::istream& in, std::string_view source) {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (t.header.empty()) {
      for (auto c : cells) {
        if (c.empty()) throw DataError(fmt::format("{}:{}: empty column name", source, lineno));
        t.header.emplace_back(c);
      }
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw DataError(
          fmt::format("{}:{}: {} cells, header has {}", source, lineno, cells.size(), t.header.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (cells[k].empty()) throw DataError(fmt::format("{}:{}: missing value in column '{}'", source, lineno, t.header[k]));
      row.push_back(to_double(cells[k], fmt::format("{}:{}", source, lineno)));
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw DataError(fmt::format("{}: no header row", source));
  return t;
}

std::ptrdiff_t column_index(const Table& t, std::string_view name) {
  for (std::size_t k = 0; k < t.header.size(); ++k) {
    if (t.header[k] == name) return static_cast<std::ptrdiff_t>(k);
  }
  return -1;
}

// Reads "key v1 v2 ..." lines of a model file.
class ModelReader {
 public:
  ModelReader(std::istream& in, std::string_view source) : in_(in), source_(source) {}

  std::vector<std::string> next(std::string_view key) {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      if (!trim(line).empty()) break;
      line.clear();
    }
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    for (std::string tok; ss >> tok;) tokens.push_back(tok);
    if (tokens.empty() || tokens.front() != key) {
      throw DataError(fmt::format("{}:{}: expected '{}'", source_, lineno_, key));
    }
    tokens.erase(tokens.begin());
    return tokens;
  }

  double scalar(std::string_view key) { return to_double(one(key), where()); }
  std::size_t count(std::string_view key) { return to_size(one(key), where()); }

  std::vector<double> values(std::string_view key) {
    std::vector<double> out;
    for (const auto& tok : next(key)) out.push_back(to_double(tok, where()));
    return out;
  }

  std::string where() const { return fmt::format("{}:{}", source_, lineno_); }

 private:
  std::string one(std::string_view key) {
    auto tokens = next(key);
    if (tokens.size() != 1) throw DataError(fmt::format("{}: '{}' takes one value", where(), key));
    return tokens.front();
  }

  std::istream& in_;
  std::string source_;
  std::size_t lineno_ = 0;
};

std::string join_numbers(std::span<const double> v) {
  std::string out;
  for (double x : v) out += fmt::format(" {:.17g}", x);
  return out;
}

Matrix read_centers(const std::filesystem::path& path) {
  auto in = open_input(path);
  Matrix centers;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (auto cell : split(line, ',')) row.push_back(to_double(cell, fmt::format("{}:{}", path.string(), lineno)));
    if (!centers.empty() && row.size() != centers.cols()) {
      throw DataError(fmt::format("{}:{}: ragged center row", path.string(), lineno));
    }
    centers.append_row(row);
  }
  if (centers.rows() == 0) throw DataError(fmt::format("{}: no centers", path.string()));
  return centers;
}

double spec_number(std::string_view s, std::string_view spec) {
  double v = 0.0;
  if (!parse_double(s, v)) throw UsageError(fmt::format("bad number '{}' in dictionary spec '{}'", s, spec));
  return v;
}

}  // namespace

Dataset parse_dataset(std::istream& in, bool require_labels, std::string_view source) {
  const Table t = parse_table(in, source);
  const std::ptrdiff_t ycol = column_index(t, "y");
  if (require_labels && ycol < 0) throw DataError(fmt::format("{}: no 'y' column", source));
  Dataset ds;
  for (std::size_t k = 0; k < t.header.size(); ++k) {
    if (static_cast<std::ptrdiff_t>(k) != ycol) ds.feature_names.push_back(t.header[k]);
  }
  if (ds.feature_names.empty()) throw DataError(fmt::format("{}: no feature columns", source));
  ds.x = Matrix(t.rows.size(), ds.feature_names.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    std::size_t out = 0;
    for (std::size_t k = 0; k < t.header.size(); ++k) {
      if (static_cast<std::ptrdiff_t>(k) == ycol) {
        const double y = t.rows[i][k];
        if (y != 1.0 && y != -1.0) throw DataError(fmt::format("{}: row {} has label {}", source, i + 1, y));
        ds.y.push_back(static_cast<int>(y));
      } else {
        ds.x(i, out++) = t.rows[i][k];
      }
    }
  }
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path, bool require_labels) {
  auto in = open_input(path);
  return parse_dataset(in, require_labels, path.string());
}

DiscreteDistribution parse_distribution(std::istream& in, std::string_view source) {
  const Table t = parse_table(in, source);
  if (t.header.size() < 3 || t.header[0] != "p" || t.header[1] != "eta") {
    throw DataError(fmt::format("{}: expected columns p, eta, then features", source));
  }
  DiscreteDistribution dist;
  for (const auto& row : t.rows) {
    dist.atoms.push_back({std::vector<double>(row.begin() + 2, row.end()), row[0], row[1]});
  }
  try {
    dist.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(fmt::format("{}: {}", source, e.what()));
  }
  return dist;
}

DiscreteDistribution read_distribution(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_distribution(in, path.string());
}

Dictionary parse_dictionary_spec(std::string_view spec, const Matrix& rows) {
  const auto parts = split(spec, ':');
  const std::string_view head = parts.front();
  const std::size_t dim = rows.cols();
  if (head == "linear" || head == "const_linear" || head == "constant") {
    if (parts.size() != 1) throw UsageError(fmt::format("dictionary '{}' takes no options", head));
    if (dim == 0) throw UsageError("dictionary needs data with at least one feature");
    if (head == "linear") return Dictionary::linear(dim);
    if (head == "const_linear") return Dictionary::constant_linear(dim);
    return Dictionary::constant(dim);
  }
  if (head == "rbf") {
    if (parts.size() < 2) throw UsageError(fmt::format("'{}': rbf needs grid counts such as rbf:10x10", spec));
    std::vector<std::size_t> counts;
    for (auto c : split(parts[1], 'x')) {
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size() || v == 0) {
        throw UsageError(fmt::format("bad grid count '{}' in '{}'", c, spec));
      }
      counts.push_back(v);
    }
    if (counts.size() != dim) {
      throw UsageError(fmt::format("'{}' has {} axes but the data has {} features", spec, counts.size(), dim));
    }
    double beta = 2.0;
    auto [lo, hi] = rows.rows() > 0 ? bounding_box(rows) : std::pair<std::vector<double>, std::vector<double>>{};
    for (std::size_t k = 2; k < parts.size(); ++k) {
      if (parts[k].starts_with("beta=")) {
        beta = spec_number(parts[k].substr(5), spec);
      } else if (parts[k].starts_with("box=")) {
        const auto nums = split(parts[k].substr(4), ',');
        if (nums.size() != 2 * dim) throw UsageError(fmt::format("box in '{}' needs {} numbers", spec, 2 * dim));
        lo.assign(dim, 0.0);
        hi.assign(dim, 0.0);
        for (std::size_t a = 0; a < dim; ++a) {
          lo[a] = spec_number(nums[a], spec);
          hi[a] = spec_number(nums[dim + a], spec);
        }
      } else {
        throw UsageError(fmt::format("unknown option '{}' in '{}'", parts[k], spec));
      }
    }
    if (lo.empty()) throw UsageError(fmt::format("'{}' needs data rows or an explicit box", spec));
    return Dictionary::rbf_lattice(std::move(counts), std::move(lo), std::move(hi), beta);
  }
  if (head == "custom") {
    if (parts.size() < 2 || parts[1].empty()) throw UsageError(fmt::format("'{}': custom needs a centers file", spec));
    double beta = 2.0;
    for (std::size_t k = 2; k < parts.size(); ++k) {
      if (!parts[k].starts_with("beta=")) throw UsageError(fmt::format("unknown option '{}' in '{}'", parts[k], spec));
      beta = spec_number(parts[k].substr(5), spec);
    }
    Matrix centers = read_centers(std::filesystem::path(std::string(parts[1])));
    if (dim != 0 && centers.cols() != dim) {
      throw UsageError(fmt::format("centers have {} coordinates, data has {}", centers.cols(), dim));
    }
    return Dictionary::custom_rbf(std::move(centers), beta);
  }
  throw UsageError(fmt::format("unknown dictionary spec '{}'", spec));
}

void write_model(std::ostream& out, const Model& model) {
  const Dictionary& dict = model.dict;
  fmt::print(out, "{} {}\n", kModelMagic, kModelVersion);
  fmt::print(out, "dictionary {}\n", to_string(dict.kind()));
  fmt::print(out, "input_dim {}\n", dict.input_dim());
  if (dict.kind() == DictionaryKind::kRbfLattice) {
    fmt::print(out, "beta {:.17g}\n", dict.bandwidth());
    std::string counts;
    for (std::size_t c : dict.grid_counts()) counts += fmt::format(" {}", c);
    fmt::print(out, "counts{}\n", counts);
    fmt::print(out, "lower{}\n", join_numbers(dict.lower()));
    fmt::print(out, "upper{}\n", join_numbers(dict.upper()));
  } else if (dict.kind() == DictionaryKind::kCustomRbf) {
    fmt::print(out, "beta {:.17g}\n", dict.bandwidth());
    fmt::print(out, "centers {}\n", dict.centers().rows());
    for (std::size_t i = 0; i < dict.centers().rows(); ++i) {
      fmt::print(out, "center{}\n", join_numbers(dict.centers().row(i)));
    }
  }
  fmt::print(out, "sup_norm {:.17g} {}\n", dict.sup_norm().value, dict.sup_norm().estimated ? "estimated" : "declared");
  fmt::print(out, "d {:.17g}\n", model.cp.d());
  fmt::print(out, "a {:.17g}\n", model.cp.a());
  fmt::print(out, "tau {:.17g}\n", model.cp.tau());
  fmt::print(out, "r {:.17g}\n", model.r);
  fmt::print(out, "n {}\n", model.meta.n);
  fmt::print(out, "objective {:.17g}\n", model.meta.objective);
  fmt::print(out, "iterations {}\n", model.meta.iterations);
  fmt::print(out, "lambda {}\n", model.lambda.size());
  for (double v : model.lambda) fmt::print(out, "{:.17g}\n", v);
}

Model parse_model(std::istream& in, std::string_view source) {
  ModelReader rd(in, source);
  const auto version = rd.next(kModelMagic);
  if (version.size() != 1 || version.front() != std::to_string(kModelVersion)) {
    throw DataError(fmt::format("{}: unsupported model format version", rd.where()));
  }
  const auto kind = rd.next("dictionary");
  if (kind.size() != 1) throw DataError(fmt::format("{}: dictionary takes one value", rd.where()));
  const std::size_t dim = rd.count("input_dim");

  std::optional<Dictionary> dict;
  try {
    if (kind.front() == "linear") {
      dict = Dictionary::linear(dim);
    } else if (kind.front() == "constant_linear") {
      dict = Dictionary::constant_linear(dim);
    } else if (kind.front() == "constant") {
      dict = Dictionary::constant(dim);
    } else if (kind.front() == "rbf_lattice") {
      const double beta = rd.scalar("beta");
      std::vector<std::size_t> counts;
      for (const auto& tok : rd.next("counts")) counts.push_back(to_size(tok, rd.where()));
      auto lower = rd.values("lower");
      auto upper = rd.values("upper");
      dict = Dictionary::rbf_lattice(std::move(counts), std::move(lower), std::move(upper), beta);
    } else if (kind.front() == "custom_rbf") {
      const double beta = rd.scalar("beta");
      const std::size_t k = rd.count("centers");
      Matrix centers;
      for (std::size_t i = 0; i < k; ++i) centers.append_row(rd.values("center"));
      dict = Dictionary::custom_rbf(std::move(centers), beta);
    } else {
      throw DataError(fmt::format("{}: unknown dictionary kind '{}'", rd.where(), kind.front()));
    }
  } catch (const std::invalid_argument& e) {
    throw DataError(fmt::format("{}: {}", rd.where(), e.what()));
  }
  if (dict->input_dim() != dim) throw DataError(fmt::format("{}: dictionary dimension mismatch", rd.where()));

  const auto sup = rd.next("sup_norm");
  if (sup.size() != 2 || (sup[1] != "estimated" && sup[1] != "declared")) {
    throw DataError(fmt::format("{}: sup_norm needs a value and 'estimated' or 'declared'", rd.where()));
  }
  *dict = dict->with_sup_norm({to_double(sup[0], rd.where()), sup[1] == "estimated"});

  const double d = rd.scalar("d");
  const double a = rd.scalar("a");
  const double tau = rd.scalar("tau");
  const double r = rd.scalar("r");
  std::optional<CostParams> cp;
  try {
    cp.emplace(d, tau);
    cp->check_slope(a);
  } catch (const std::invalid_argument& e) {
    throw DataError(fmt::format("{}: {}", rd.where(), e.what()));
  }
  TrainMeta meta;
  meta.n = rd.count("n");
  meta.objective = rd.scalar("objective");
  meta.iterations = rd.count("iterations");
  const std::size_t m = rd.count("lambda");
  if (m != dict->size()) {
    throw DataError(fmt::format("{}: {} coefficients for a dictionary of size {}", rd.where(), m, dict->size()));
  }
  std::vector<double> lambda(m);
  std::string line;
  for (std::size_t j = 0; j < m; ++j) {
    if (!std::getline(in, line)) throw DataError(fmt::format("{}: model file ends early", source));
    lambda[j] = to_double(trim(line), source);
  }
  return Model{std::move(lambda), std::move(*dict), *cp, r, meta};
}

void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  write_model(out, model);
  if (!out) throw DataError(fmt::format("write to '{}' failed", path.string()));
}

Model load_model(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_model(in, path.string());
}

void write_predictions(std::ostream& out, std::span<const double> margins, std::span<const int> decisions) {
  out << "margin,decision\n";
  for (std::size_t i = 0; i < margins.size(); ++i) fmt::print(out, "{:.17g},{}\n", margins[i], decisions[i]);
}

void write_risk_report(std::ostream& out, const RiskReport& rep) {
  out << "n_eval,phi_risk,ell_risk,misclass_rate,reject_rate,excess_ell\n";
  fmt::print(out, "{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", rep.n_eval, rep.phi_risk, rep.ell_risk,
             rep.misclass_rate, rep.reject_rate, rep.excess_ell ? fmt::format("{:.17g}", *rep.excess_ell) : "");
}

void write_bound_report(std::ostream& out, const BoundReport& rep) {
  out << "bound,gamma,empirical,penalty,tail,value,l1,delta,p\n";
  for (const auto& [name, term] : {std::pair{"misclass", rep.misclass}, std::pair{"reject", rep.reject}}) {
    fmt::print(out, "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", name, term.gamma,
               term.empirical, term.penalty, rep.tail, term.value, rep.l1, rep.delta, rep.p);
  }
}

void write_cv_table(std::ostream& out, const CvResult& cv) {
  out << "r,mean_ell,fold_se,selected\n";
  for (const CvRow& row : cv.table) {
    fmt::print(out, "{:.17g},{:.17g},{:.17g},{}\n", row.r, row.mean_ell, row.fold_se, row.r == cv.best_r ? 1 : 0);
  }
}

void write_check_rows(std::ostream& out, std::span<const CheckRow> rows) {
  out << "name,status,slack,witness\n";
  for (const CheckRow& row : rows) {
    std::string witness = row.witness;
    std::string quoted;
    for (char ch : witness) {
      if (ch == '"') quoted += '"';
      quoted += ch;
    }
    fmt::print(out, "{},{},{:.17g},\"{}\"\n", row.name, to_string(row.status), row.slack, quoted);
  }
}

}  // namespace rsvm
