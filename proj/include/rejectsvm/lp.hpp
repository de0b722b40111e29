#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace rsvm::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { kLessEqual, kGreaterEqual, kEqual };

struct Constraint {
  std::vector<double> coeffs;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

// Either side may be infinite. The default is x >= 0.
struct Bound {
  double lower = 0.0;
  double upper = kInf;

  static Bound free() { return {-kInf, kInf}; }
  static Bound non_negative() { return {0.0, kInf}; }
};

// min objective . x  subject to constraints and per-variable bounds.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<Constraint> constraints;
  std::vector<Bound> bounds;

  LinearProgram() = default;
  explicit LinearProgram(std::size_t num_variables)
      : objective(num_variables, 0.0), bounds(num_variables) {}

  std::size_t num_variables() const noexcept { return objective.size(); }

  void add(std::vector<double> coeffs, Relation relation, double rhs) {
    constraints.push_back({std::move(coeffs), relation, rhs});
  }

  // Throws StructuralError on ragged rows, non-finite coefficients or
  // inverted bounds.
  void validate() const;
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

std::string_view to_string(Status status);

struct LpSolution {
  Status status = Status::kInfeasible;
  std::vector<double> primal;    // empty unless optimal
  double objective_value = 0.0;  // meaningful only when optimal
  // One multiplier per constraint (>= 0 on >= rows, <= 0 on <= rows), so
  // that objective_value = sum_i duals[i] * rhs[i] plus bound terms.
  std::vector<double> duals;
  std::size_t iterations = 0;
};

struct SolveOptions {
  // When set, the initial standard-form tableau is written here: the
  // objective row first, then one constraint row per line with the rhs last.
  std::optional<std::filesystem::path> tableau_dump;
  // Consecutive degenerate pivots before pricing falls back to Bland's rule.
  std::size_t degenerate_switch = 20;
};

// Two-phase dense simplex. Deterministic for identical input.
// Throws StructuralError for malformed input and NumericalFailure when the
// tableau blows up or the iteration cap is reached.
LpSolution solve_lp(const LinearProgram& lp, const SolveOptions& options = {});

// Brute-force reference: enumerates every basis of the standard-form
// conversion. Refuses (OversizeError) when columns + slacks exceed
// kMaxOracleColumns.
inline constexpr std::size_t kMaxOracleColumns = 20;
LpSolution enumerate_vertices_oracle(const LinearProgram& lp);

// Largest absolute row violation of x against lp (bounds included).
double max_violation(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace rsvm::lp
