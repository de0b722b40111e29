#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "rejectsvm/matrix.hpp"

namespace rsvm {

enum class DictionaryKind { kLinear, kConstantLinear, kConstant, kRbfLattice, kCustomRbf };

std::string_view to_string(DictionaryKind kind);

// C_F = max_j sup_x |f_j(x)|, either known from the construction or
// estimated as the largest |f_j(x_i)| on training rows.
struct SupNorm {
  double value = 0.0;
  bool estimated = false;
};

// Evaluations Phi(i, j) = f_j(x_i), optionally with labels in {-1, +1}.
struct DesignMatrix {
  Matrix phi;
  std::vector<int> labels;

  std::size_t n() const noexcept { return phi.rows(); }
  std::size_t m() const noexcept { return phi.cols(); }
  bool labeled() const noexcept { return !labels.empty(); }

  // Throws StructuralError on non-finite entries, a label count different
  // from n, or labels outside {-1, +1}.
  void validate() const;
};

// The basis functions f_1..f_M. Immutable once built.
class Dictionary {
 public:
  // f_j(x) = x_j.
  static Dictionary linear(std::size_t dim);
  // f_0 = 1, f_j(x) = x_j.
  static Dictionary constant_linear(std::size_t dim);
  // Single f = 1 on inputs of the given dimension.
  static Dictionary constant(std::size_t dim);
  // Gaussian bumps exp(-beta ||x - b_j||^2) centered on an equally spaced
  // lattice spanning [lower, upper] (corners included; a single point per
  // axis sits at the midpoint). The last axis varies fastest.
  static Dictionary rbf_lattice(std::vector<std::size_t> counts, std::vector<double> lower, std::vector<double> upper,
                                double beta = 2.0);
  // Gaussian bumps at arbitrary centers (one per row).
  static Dictionary custom_rbf(Matrix centers, double beta = 2.0);

  DictionaryKind kind() const noexcept { return kind_; }
  std::size_t input_dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return size_; }
  const SupNorm& sup_norm() const noexcept { return sup_norm_; }
  double bandwidth() const noexcept { return beta_; }
  const Matrix& centers() const noexcept { return centers_; }
  const std::vector<std::size_t>& grid_counts() const noexcept { return counts_; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }

  // out.size() must equal size().
  void eval(std::span<const double> x, std::span<double> out) const;
  std::vector<double> eval(std::span<const double> x) const;

  DesignMatrix evaluate(const Matrix& rows, std::vector<int> labels = {}) const;

  // Copy whose C_F is the largest |Phi(i, j)| when C_F is data-dependent;
  // dictionaries with a declared C_F are returned unchanged.
  Dictionary with_estimated_sup_norm(const DesignMatrix& train) const;
  Dictionary with_sup_norm(SupNorm sup_norm) const;

 private:
  Dictionary() = default;

  DictionaryKind kind_ = DictionaryKind::kLinear;
  std::size_t dim_ = 0;
  std::size_t size_ = 0;
  double beta_ = 0.0;
  Matrix centers_;
  std::vector<std::size_t> counts_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  SupNorm sup_norm_;
};

// Per-axis (lower, upper) corners of the rows.
std::pair<std::vector<double>, std::vector<double>> bounding_box(const Matrix& rows);

}  // namespace rsvm
