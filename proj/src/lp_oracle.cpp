// Exhaustive basis enumeration, used only as an independent check on solve_lp.

#include <fmt/format.h>

#include <Eigen/Dense>
#include <cmath>

#include "rejectsvm/errors.hpp"
#include "rejectsvm/lp.hpp"

namespace rsvm::lp {

namespace {

constexpr double kTol = 1e-9;

// Standard form  A z = b, z >= 0, with x = shift + lift * z.
struct EqualityForm {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Eigen::MatrixXd lift;
  Eigen::VectorXd shift;
};

EqualityForm build_equality_form(const LinearProgram& lp) {
  const auto n = static_cast<Eigen::Index>(lp.num_variables());

  // Columns produced by each original variable.
  std::vector<std::pair<Eigen::Index, double>> cols;
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(n);
  std::vector<std::pair<Eigen::Index, double>> box_rows;  // (column, width)
  for (Eigen::Index j = 0; j < n; ++j) {
    const Bound& bd = lp.bounds[static_cast<std::size_t>(j)];
    const bool lo = std::isfinite(bd.lower);
    const bool hi = std::isfinite(bd.upper);
    if (lo) {
      shift(j) = bd.lower;
      cols.emplace_back(j, 1.0);
      if (hi) box_rows.emplace_back(static_cast<Eigen::Index>(cols.size() - 1), bd.upper - bd.lower);
    } else if (hi) {
      shift(j) = bd.upper;
      cols.emplace_back(j, -1.0);
    } else {
      cols.emplace_back(j, 1.0);
      cols.emplace_back(j, -1.0);
    }
  }

  const auto nstruct = static_cast<Eigen::Index>(cols.size());
  const auto mrows = static_cast<Eigen::Index>(lp.constraints.size() + box_rows.size());
  Eigen::Index nslack = static_cast<Eigen::Index>(box_rows.size());
  for (const Constraint& con : lp.constraints) nslack += con.relation != Relation::kEqual;
  const Eigen::Index total = nstruct + nslack;
  if (static_cast<std::size_t>(total) > kMaxOracleColumns) {
    throw OversizeError(fmt::format("vertex enumeration needs {} columns; limit is {}", total, kMaxOracleColumns));
  }

  EqualityForm ef;
  ef.a = Eigen::MatrixXd::Zero(mrows, total);
  ef.b = Eigen::VectorXd::Zero(mrows);
  ef.c = Eigen::VectorXd::Zero(total);
  ef.lift = Eigen::MatrixXd::Zero(n, total);
  ef.shift = shift;
  for (Eigen::Index k = 0; k < nstruct; ++k) {
    ef.lift(cols[k].first, k) = cols[k].second;
    ef.c(k) = lp.objective[static_cast<std::size_t>(cols[k].first)] * cols[k].second;
  }

  Eigen::Index row = 0;
  Eigen::Index slack = nstruct;
  for (const Constraint& con : lp.constraints) {
    Eigen::VectorXd coeffs = Eigen::Map<const Eigen::VectorXd>(con.coeffs.data(), n);
    ef.a.row(row).head(nstruct) = (coeffs.transpose() * ef.lift.leftCols(nstruct));
    ef.b(row) = con.rhs - coeffs.dot(shift);
    if (con.relation == Relation::kLessEqual) ef.a(row, slack++) = 1.0;
    if (con.relation == Relation::kGreaterEqual) ef.a(row, slack++) = -1.0;
    ++row;
  }
  for (const auto& [col, width] : box_rows) {
    ef.a(row, col) = 1.0;
    ef.a(row, slack++) = 1.0;
    ef.b(row) = width;
    ++row;
  }
  return ef;
}

// Calls visit(indices) for every k-subset of {0..n-1} in lexicographic order.
template <typename Visit>
void for_each_subset(Eigen::Index n, Eigen::Index k, Visit&& visit) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (;;) {
    visit(idx);
    Eigen::Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

LpSolution enumerate_vertices_oracle(const LinearProgram& lp) {
  lp.validate();
  const EqualityForm ef = build_equality_form(lp);
  const Eigen::Index total = ef.a.cols();

  LpSolution result;

  // Keep a maximal set of independent rows; an inconsistent system is infeasible.
  Eigen::MatrixXd a = ef.a;
  Eigen::VectorXd b = ef.b;
  if (a.rows() > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu_a(a);
    Eigen::MatrixXd aug(a.rows(), total + 1);
    aug << a, b;
    Eigen::FullPivLU<Eigen::MatrixXd> lu_aug(aug);
    lu_a.setThreshold(1e-10);
    lu_aug.setThreshold(1e-10);
    if (lu_aug.rank() > lu_a.rank()) return result;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.transpose());
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    Eigen::MatrixXd a_ind(rank, total);
    Eigen::VectorXd b_ind(rank);
    for (Eigen::Index i = 0; i < rank; ++i) {
      const Eigen::Index src = qr.colsPermutation().indices()(i);
      a_ind.row(i) = a.row(src);
      b_ind(i) = b(src);
    }
    a = std::move(a_ind);
    b = std::move(b_ind);
  }
  const Eigen::Index m = a.rows();

  bool found = false;
  bool unbounded = false;
  double best_value = 0.0;
  Eigen::VectorXd best_z;

  for_each_subset(total, m, [&](const std::vector<Eigen::Index>& basis) {
    ++result.iterations;
    if (unbounded) return;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(total);
    Eigen::MatrixXd bmat(m, m);
    Eigen::VectorXd cb(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      bmat.col(k) = a.col(basis[static_cast<std::size_t>(k)]);
      cb(k) = ef.c(basis[static_cast<std::size_t>(k)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu;
    if (m > 0) {
      lu.compute(bmat);
      lu.setThreshold(1e-10);
      if (lu.rank() < m) return;
      const Eigen::VectorXd zb = lu.solve(b);
      if ((bmat * zb - b).cwiseAbs().maxCoeff() > 1e-8) return;
      if (zb.minCoeff() < -kTol) return;
      for (Eigen::Index k = 0; k < m; ++k) z(basis[static_cast<std::size_t>(k)]) = std::max(zb(k), 0.0);
    }
    // Improving ray from this vertex means the problem is unbounded.
    std::vector<bool> in_basis(static_cast<std::size_t>(total), false);
    for (Eigen::Index k : basis) in_basis[static_cast<std::size_t>(k)] = true;
    for (Eigen::Index j = 0; j < total; ++j) {
      if (in_basis[static_cast<std::size_t>(j)]) continue;
      Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
      double reduced = ef.c(j);
      if (m > 0) {
        w = lu.solve(Eigen::VectorXd(a.col(j)));
        reduced -= cb.dot(w);
      }
      if (reduced < -kTol && (m == 0 || w.maxCoeff() <= kTol)) {
        unbounded = true;
        return;
      }
    }
    const double value = ef.c.dot(z);
    if (!found || value < best_value) {
      found = true;
      best_value = value;
      best_z = z;
    }
  });

  if (unbounded) {
    result.status = Status::kUnbounded;
    return result;
  }
  if (!found) return result;

  const Eigen::VectorXd x = ef.shift + ef.lift * best_z;
  result.status = Status::kOptimal;
  result.primal.assign(x.data(), x.data() + x.size());
  double value = 0.0;
  for (std::size_t j = 0; j < lp.num_variables(); ++j) value += lp.objective[j] * result.primal[j];
  result.objective_value = value;
  return result;
}

}  // namespace rsvm::lp
