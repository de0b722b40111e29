#include "rejectsvm/lp.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "rejectsvm/constants.hpp"
#include "rejectsvm/errors.hpp"

namespace rsvm::lp {

std::string_view to_string(Status status) {
  switch (status) {
    case Status::kOptimal:
      return "optimal";
    case Status::kInfeasible:
      return "infeasible";
    case Status::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

void LinearProgram::validate() const {
  const std::size_t n = objective.size();
  if (n == 0) throw StructuralError("linear program has no variables");
  if (bounds.size() != n) {
    throw StructuralError(fmt::format("bounds has {} entries for {} variables", bounds.size(), n));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j])) throw StructuralError(fmt::format("objective[{}] is not finite", j));
    const Bound& b = bounds[j];
    if (std::isnan(b.lower) || std::isnan(b.upper) || b.lower == kInf || b.upper == -kInf || b.lower > b.upper) {
      throw StructuralError(fmt::format("variable {} has an empty or malformed bound", j));
    }
  }
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const Constraint& c = constraints[i];
    if (c.coeffs.size() != n) {
      throw StructuralError(fmt::format("constraint {} has {} coefficients, expected {}", i, c.coeffs.size(), n));
    }
    if (c.relation != Relation::kLessEqual && c.relation != Relation::kGreaterEqual &&
        c.relation != Relation::kEqual) {
      throw StructuralError(fmt::format("constraint {} has an unknown relation", i));
    }
    if (!std::isfinite(c.rhs)) throw StructuralError(fmt::format("constraint {} rhs is not finite", i));
    for (double v : c.coeffs) {
      if (!std::isfinite(v)) throw StructuralError(fmt::format("constraint {} has a non-finite coefficient", i));
    }
  }
}

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (const Constraint& c : lp.constraints) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) lhs += c.coeffs[j] * x[j];
    double v = 0.0;
    switch (c.relation) {
      case Relation::kLessEqual:
        v = lhs - c.rhs;
        break;
      case Relation::kGreaterEqual:
        v = c.rhs - lhs;
        break;
      case Relation::kEqual:
        v = std::abs(lhs - c.rhs);
        break;
    }
    worst = std::max(worst, v);
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    worst = std::max({worst, lp.bounds[j].lower - x[j], x[j] - lp.bounds[j].upper});
  }
  return worst;
}

namespace {

// x[var] = offset[var] + sum over columns mapped to var of sign * column.
struct ColumnOrigin {
  std::size_t var;
  double sign;
};

struct StandardForm {
  std::vector<ColumnOrigin> columns;
  std::vector<double> offset;
  std::vector<double> cost;  // per structural column
  std::vector<std::vector<double>> rows;
  std::vector<Relation> relations;
  std::vector<double> rhs;
};

StandardForm to_standard_form(const LinearProgram& lp) {
  StandardForm sf;
  const std::size_t n = lp.num_variables();
  sf.offset.assign(n, 0.0);

  std::vector<std::size_t> upper_rows;  // variables needing an explicit x' <= u - l row
  for (std::size_t j = 0; j < n; ++j) {
    const Bound& b = lp.bounds[j];
    if (std::isfinite(b.lower)) {
      sf.offset[j] = b.lower;
      sf.columns.push_back({j, 1.0});
      if (std::isfinite(b.upper)) upper_rows.push_back(sf.columns.size() - 1);
    } else if (std::isfinite(b.upper)) {
      sf.offset[j] = b.upper;
      sf.columns.push_back({j, -1.0});
    } else {
      sf.columns.push_back({j, 1.0});
      sf.columns.push_back({j, -1.0});
    }
  }

  const std::size_t ncols = sf.columns.size();
  sf.cost.resize(ncols);
  for (std::size_t k = 0; k < ncols; ++k) sf.cost[k] = lp.objective[sf.columns[k].var] * sf.columns[k].sign;

  for (const Constraint& c : lp.constraints) {
    std::vector<double> row(ncols);
    double rhs = c.rhs;
    for (std::size_t j = 0; j < n; ++j) rhs -= c.coeffs[j] * sf.offset[j];
    for (std::size_t k = 0; k < ncols; ++k) row[k] = c.coeffs[sf.columns[k].var] * sf.columns[k].sign;
    sf.rows.push_back(std::move(row));
    sf.relations.push_back(c.relation);
    sf.rhs.push_back(rhs);
  }
  for (std::size_t k : upper_rows) {
    std::vector<double> row(ncols, 0.0);
    row[k] = 1.0;
    const Bound& b = lp.bounds[sf.columns[k].var];
    sf.rows.push_back(std::move(row));
    sf.relations.push_back(Relation::kLessEqual);
    sf.rhs.push_back(b.upper - b.lower);
  }
  return sf;
}

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t width) : m_(rows), w_(width), t_(rows * width, 0.0), obj_(width, 0.0) {}

  std::size_t rows() const { return m_; }
  std::size_t rhs_col() const { return w_ - 1; }
  double* row(std::size_t i) { return t_.data() + i * w_; }
  const double* row(std::size_t i) const { return t_.data() + i * w_; }
  std::vector<double>& obj() { return obj_; }
  std::vector<std::size_t>& basis() { return basis_; }

  // Pivot on (r, c). Columns in [active_end, rhs) are left untouched.
  void pivot(std::size_t r, std::size_t c, std::size_t active_end) {
    double* pr = row(r);
    const double inv = 1.0 / pr[c];
    nz_.clear();
    double largest = 0.0;
    auto scale = [&](std::size_t k) {
      if (pr[k] != 0.0) {
        pr[k] *= inv;
        largest = std::max(largest, std::abs(pr[k]));
        nz_.push_back(k);
      }
    };
    for (std::size_t k = 0; k < active_end; ++k) scale(k);
    scale(rhs_col());
    pr[c] = 1.0;
    if (!(largest <= tol::kBlowUp)) {
      throw NumericalFailure(fmt::format("pivot row entry {:.3g} exceeds blow-up threshold", largest));
    }
    auto eliminate = [&](double* target) {
      const double f = target[c];
      if (f == 0.0) return;
      for (std::size_t k : nz_) {
        double v = target[k] - f * pr[k];
        target[k] = std::abs(v) < kDrop ? 0.0 : v;
      }
      target[c] = 0.0;
    };
    for (std::size_t i = 0; i < m_; ++i) {
      if (i != r) eliminate(row(i));
    }
    eliminate(obj_.data());
    basis_[r] = c;
  }

  void drop_rows(const std::vector<bool>& keep) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (!keep[i]) continue;
      if (out != i) {
        std::copy(row(i), row(i) + w_, row(out));
        basis_[out] = basis_[i];
      }
      ++out;
    }
    m_ = out;
    t_.resize(m_ * w_);
    basis_.resize(m_);
  }

 private:
  static constexpr double kDrop = 1e-13;
  std::size_t m_;
  std::size_t w_;
  std::vector<double> t_;
  std::vector<double> obj_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> nz_;
};

enum class PhaseResult { kOptimal, kUnbounded };

class Simplex {
 public:
  Simplex(Tableau& tab, std::size_t degenerate_switch, std::size_t iteration_cap)
      : tab_(tab), degenerate_switch_(degenerate_switch), cap_(iteration_cap) {}

  // Columns [0, price_end) may enter; every column is kept up to date.
  PhaseResult run(std::size_t price_end) {
    std::size_t degenerate_run = 0;
    for (;;) {
      const bool bland = degenerate_run >= degenerate_switch_;
      const auto entering = choose_entering(price_end, bland);
      if (!entering) return PhaseResult::kOptimal;
      const auto leaving = choose_leaving(*entering, bland);
      if (!leaving) return PhaseResult::kUnbounded;
      const double step = std::max(tab_.row(*leaving)[tab_.rhs_col()], 0.0);
      tab_.pivot(*leaving, *entering, tab_.rhs_col());
      if (++iterations_ > cap_) throw NumericalFailure("simplex iteration limit reached");
      degenerate_run = step <= kDegenerate ? degenerate_run + 1 : 0;
    }
  }

  std::size_t iterations() const { return iterations_; }

 private:
  static constexpr double kDegenerate = 1e-12;
  static constexpr double kHarris = 1e-9;
  static constexpr double kRelativePivot = 1e-3;

  std::optional<std::size_t> choose_entering(std::size_t price_end, bool bland) const {
    const std::vector<double>& d = tab_.obj();
    std::optional<std::size_t> best;
    double most_negative = -tol::kOptimality;
    for (std::size_t j = 0; j < price_end; ++j) {
      if (d[j] < most_negative) {
        best = j;
        if (bland) break;
        most_negative = d[j];
      }
    }
    return best;
  }

  // Two-pass (Harris) ratio test: the first pass finds the largest step that
  // keeps every basic variable above -kHarris, the second picks among rows
  // blocking within that step the largest pivot, or under Bland's rule the
  // lowest basic index among acceptably sized pivots.
  std::optional<std::size_t> choose_leaving(std::size_t c, bool bland) const {
    const std::size_t rhs = tab_.rhs_col();
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tab_.rows(); ++i) {
      const double* r = tab_.row(i);
      if (r[c] > tol::kPivot) bound = std::min(bound, (std::max(r[rhs], 0.0) + kHarris) / r[c]);
    }
    if (!std::isfinite(bound)) return std::nullopt;

    double largest = 0.0;
    for (std::size_t i = 0; i < tab_.rows(); ++i) {
      const double* r = tab_.row(i);
      if (r[c] > tol::kPivot && std::max(r[rhs], 0.0) / r[c] <= bound) largest = std::max(largest, r[c]);
    }
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < tab_.rows(); ++i) {
      const double* r = tab_.row(i);
      const double a = r[c];
      if (!(a > tol::kPivot) || std::max(r[rhs], 0.0) / a > bound) continue;
      if (bland) {
        if (a < kRelativePivot * largest) continue;
        if (!best || tab_.basis()[i] < tab_.basis()[*best]) best = i;
      } else if (a == largest) {
        best = i;
        break;
      }
    }
    return best;
  }

  Tableau& tab_;
  std::size_t degenerate_switch_;
  std::size_t cap_;
  std::size_t iterations_ = 0;
};

void dump_tableau(const std::filesystem::path& path, const Tableau& tab, const std::vector<double>& cost,
                  std::size_t ncols) {
  auto out = fmt::output_file(path.string());
  for (std::size_t k = 0; k < ncols; ++k) out.print("{:.17g} ", cost[k]);
  out.print("{:.17g}\n", 0.0);
  for (std::size_t i = 0; i < tab.rows(); ++i) {
    const double* r = tab.row(i);
    for (std::size_t k = 0; k < ncols; ++k) out.print("{:.17g} ", r[k]);
    out.print("{:.17g}\n", r[tab.rhs_col()]);
  }
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SolveOptions& options) {
  lp.validate();
  const StandardForm sf = to_standard_form(lp);
  const std::size_t m = sf.rows.size();
  const std::size_t nstruct = sf.columns.size();

  std::size_t nslack = 0;
  for (Relation r : sf.relations) nslack += r != Relation::kEqual;
  const std::size_t art_start = nstruct + nslack;

  // Row sign after making rhs non-negative; rows whose slack enters with +1
  // start with the slack basic, every other row gets an artificial.
  std::vector<double> sign(m, 1.0);
  std::vector<std::optional<std::size_t>> slack_col(m);
  std::size_t nart = 0;
  {
    std::size_t next_slack = nstruct;
    for (std::size_t i = 0; i < m; ++i) {
      if (sf.rhs[i] < 0.0) sign[i] = -1.0;
      if (sf.relations[i] != Relation::kEqual) slack_col[i] = next_slack++;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double slack_coef = sf.relations[i] == Relation::kLessEqual    ? sign[i]
                                : sf.relations[i] == Relation::kGreaterEqual ? -sign[i]
                                                                             : 0.0;
      if (!(slack_coef > 0.0 || (slack_coef < 0.0 && sf.rhs[i] == 0.0))) ++nart;
    }
  }

  Tableau tab(m, art_start + nart + 1);
  tab.basis().assign(m, 0);
  std::vector<bool> has_artificial(m, false);
  std::vector<double> row_multiplier(sign);  // normalized row = multiplier * original row
  std::vector<std::size_t> initial_column(m);
  double rhs_scale = 1.0;
  {
    std::size_t next_art = art_start;
    for (std::size_t i = 0; i < m; ++i) {
      double* r = tab.row(i);
      for (std::size_t k = 0; k < nstruct; ++k) r[k] = sign[i] * sf.rows[i][k];
      r[tab.rhs_col()] = sign[i] * sf.rhs[i];
      if (slack_col[i]) r[*slack_col[i]] = sf.relations[i] == Relation::kLessEqual ? sign[i] : -sign[i];
      // A zero-rhs row with a -1 slack is negated so the slack can start basic.
      if (slack_col[i] && r[*slack_col[i]] < 0.0 && r[tab.rhs_col()] == 0.0) {
        for (std::size_t k = 0; k < art_start; ++k) r[k] = -r[k];
        row_multiplier[i] = -row_multiplier[i];
      }
      if (slack_col[i] && r[*slack_col[i]] > 0.0) {
        tab.basis()[i] = *slack_col[i];
      } else {
        r[next_art] = 1.0;
        tab.basis()[i] = next_art++;
        has_artificial[i] = true;
      }
      initial_column[i] = tab.basis()[i];
      rhs_scale = std::max(rhs_scale, std::abs(r[tab.rhs_col()]));
    }
  }

  if (options.tableau_dump) {
    std::vector<double> cost(art_start, 0.0);
    std::copy(sf.cost.begin(), sf.cost.end(), cost.begin());
    dump_tableau(*options.tableau_dump, tab, cost, art_start);
  }

  const std::size_t cap = 50 * (m + tab.rhs_col()) + 1000;
  Simplex simplex(tab, options.degenerate_switch, cap);
  LpSolution result;

  if (nart > 0) {
    std::vector<double>& obj = tab.obj();
    std::fill(obj.begin(), obj.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (!has_artificial[i]) continue;
      const double* r = tab.row(i);
      for (std::size_t k = 0; k < art_start; ++k) obj[k] -= r[k];
      obj[tab.rhs_col()] -= r[tab.rhs_col()];
    }
    simplex.run(tab.rhs_col());
    const double infeasibility = -tab.obj()[tab.rhs_col()];
    if (infeasibility > tol::kFeasibility * rhs_scale) {
      result.status = Status::kInfeasible;
      result.iterations = simplex.iterations();
      return result;
    }
    // Drive remaining zero-level artificials out of the basis.
    std::vector<bool> keep(tab.rows(), true);
    bool any_dropped = false;
    for (std::size_t i = 0; i < tab.rows(); ++i) {
      if (tab.basis()[i] < art_start) continue;
      const double* r = tab.row(i);
      std::optional<std::size_t> col;
      double best = tol::kPivot;
      for (std::size_t k = 0; k < art_start; ++k) {
        if (std::abs(r[k]) > best) {
          best = std::abs(r[k]);
          col = k;
        }
      }
      if (col) {
        tab.pivot(i, *col, tab.rhs_col());
      } else {
        keep[i] = false;
        any_dropped = true;
      }
    }
    if (any_dropped) tab.drop_rows(keep);
  }

  {
    std::vector<double>& obj = tab.obj();
    std::fill(obj.begin(), obj.end(), 0.0);
    std::copy(sf.cost.begin(), sf.cost.end(), obj.begin());
    for (std::size_t i = 0; i < tab.rows(); ++i) {
      const std::size_t b = tab.basis()[i];
      const double cb = b < nstruct ? sf.cost[b] : 0.0;
      if (cb == 0.0) continue;
      const double* r = tab.row(i);
      for (std::size_t k = 0; k <= tab.rhs_col(); ++k) obj[k] -= cb * r[k];
    }
  }
  const PhaseResult phase2 = simplex.run(art_start);
  result.iterations = simplex.iterations();
  if (phase2 == PhaseResult::kUnbounded) {
    result.status = Status::kUnbounded;
    return result;
  }

  std::vector<double> column_value(nstruct, 0.0);
  for (std::size_t i = 0; i < tab.rows(); ++i) {
    const std::size_t b = tab.basis()[i];
    if (b < nstruct) column_value[b] = std::max(tab.row(i)[tab.rhs_col()], 0.0);
  }
  result.primal = sf.offset;
  for (std::size_t k = 0; k < nstruct; ++k) {
    result.primal[sf.columns[k].var] += sf.columns[k].sign * column_value[k];
  }
  result.status = Status::kOptimal;
  double value = 0.0;
  for (std::size_t j = 0; j < lp.num_variables(); ++j) value += lp.objective[j] * result.primal[j];
  result.objective_value = value;

  // Slack and artificial columns have zero phase-2 cost, so the reduced cost
  // of a row's initial basic column is minus its (normalized) dual.
  result.duals.resize(lp.constraints.size());
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
    result.duals[i] = -row_multiplier[i] * tab.obj()[initial_column[i]];
  }
  return result;
}

}  // namespace rsvm::lp
