#include "rejectsvm/dictionary.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "rejectsvm/errors.hpp"

namespace rsvm {

std::string_view to_string(DictionaryKind kind) {
  switch (kind) {
    case DictionaryKind::kLinear:
      return "linear";
    case DictionaryKind::kConstantLinear:
      return "constant_linear";
    case DictionaryKind::kConstant:
      return "constant";
    case DictionaryKind::kRbfLattice:
      return "rbf_lattice";
    case DictionaryKind::kCustomRbf:
      return "custom_rbf";
  }
  return "unknown";
}

void DesignMatrix::validate() const {
  for (double v : phi.data()) {
    if (!std::isfinite(v)) throw StructuralError("design matrix has a non-finite entry");
  }
  if (labeled()) {
    if (labels.size() != n()) {
      throw StructuralError(fmt::format("{} labels for {} rows", labels.size(), n()));
    }
    for (int y : labels) {
      if (y != -1 && y != 1) throw StructuralError(fmt::format("label {} is not -1 or +1", y));
    }
  }
}

Dictionary Dictionary::linear(std::size_t dim) {
  if (dim == 0) throw ParameterError("linear dictionary needs dim >= 1");
  Dictionary dict;
  dict.kind_ = DictionaryKind::kLinear;
  dict.dim_ = dim;
  dict.size_ = dim;
  dict.sup_norm_ = {0.0, true};
  return dict;
}

Dictionary Dictionary::constant_linear(std::size_t dim) {
  if (dim == 0) throw ParameterError("constant+linear dictionary needs dim >= 1");
  Dictionary dict;
  dict.kind_ = DictionaryKind::kConstantLinear;
  dict.dim_ = dim;
  dict.size_ = dim + 1;
  dict.sup_norm_ = {1.0, true};
  return dict;
}

Dictionary Dictionary::constant(std::size_t dim) {
  Dictionary dict;
  dict.kind_ = DictionaryKind::kConstant;
  dict.dim_ = dim;
  dict.size_ = 1;
  dict.sup_norm_ = {1.0, false};
  return dict;
}

Dictionary Dictionary::rbf_lattice(std::vector<std::size_t> counts, std::vector<double> lower,
                                   std::vector<double> upper, double beta) {
  const std::size_t dim = counts.size();
  if (dim == 0 || lower.size() != dim || upper.size() != dim) {
    throw StructuralError("lattice counts and box corners must share one non-zero dimension");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError(fmt::format("bandwidth {} must be positive", beta));
  std::size_t total = 1;
  for (std::size_t a = 0; a < dim; ++a) {
    if (counts[a] == 0) throw ParameterError("lattice needs at least one center per axis");
    if (!std::isfinite(lower[a]) || !std::isfinite(upper[a]) || lower[a] > upper[a]) {
      throw ParameterError(fmt::format("box axis {} is not a finite interval", a));
    }
    if (counts[a] > 1 && !(upper[a] > lower[a])) {
      throw ParameterError(fmt::format("box axis {} has zero width but {} centers", a, counts[a]));
    }
    total *= counts[a];
  }

  Matrix centers(total, dim);
  std::vector<std::size_t> idx(dim, 0);
  for (std::size_t j = 0; j < total; ++j) {
    for (std::size_t a = 0; a < dim; ++a) {
      centers(j, a) = counts[a] == 1 ? 0.5 * (lower[a] + upper[a])
                                     : lower[a] + (upper[a] - lower[a]) * static_cast<double>(idx[a]) /
                                                      static_cast<double>(counts[a] - 1);
    }
    for (std::size_t a = dim; a-- > 0;) {
      if (++idx[a] < counts[a]) break;
      idx[a] = 0;
    }
  }

  Dictionary dict;
  dict.kind_ = DictionaryKind::kRbfLattice;
  dict.dim_ = dim;
  dict.size_ = total;
  dict.beta_ = beta;
  dict.centers_ = std::move(centers);
  dict.counts_ = std::move(counts);
  dict.lower_ = std::move(lower);
  dict.upper_ = std::move(upper);
  dict.sup_norm_ = {1.0, false};
  return dict;
}

Dictionary Dictionary::custom_rbf(Matrix centers, double beta) {
  if (centers.rows() == 0 || centers.cols() == 0) throw ParameterError("custom dictionary needs at least one center");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError(fmt::format("bandwidth {} must be positive", beta));
  for (double v : centers.data()) {
    if (!std::isfinite(v)) throw StructuralError("custom dictionary center is not finite");
  }
  Dictionary dict;
  dict.kind_ = DictionaryKind::kCustomRbf;
  dict.dim_ = centers.cols();
  dict.size_ = centers.rows();
  dict.beta_ = beta;
  dict.centers_ = std::move(centers);
  dict.sup_norm_ = {1.0, false};
  return dict;
}

void Dictionary::eval(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim_) {
    throw StructuralError(fmt::format("input has {} features; dictionary expects {}", x.size(), dim_));
  }
  if (out.size() != size_) throw StructuralError("output span does not match dictionary size");
  switch (kind_) {
    case DictionaryKind::kLinear:
      std::copy(x.begin(), x.end(), out.begin());
      return;
    case DictionaryKind::kConstantLinear:
      out[0] = 1.0;
      std::copy(x.begin(), x.end(), out.begin() + 1);
      return;
    case DictionaryKind::kConstant:
      out[0] = 1.0;
      return;
    case DictionaryKind::kRbfLattice:
    case DictionaryKind::kCustomRbf:
      for (std::size_t j = 0; j < size_; ++j) {
        const auto c = centers_.row(j);
        double dist2 = 0.0;
        for (std::size_t a = 0; a < dim_; ++a) dist2 += (x[a] - c[a]) * (x[a] - c[a]);
        out[j] = std::exp(-beta_ * dist2);
      }
      return;
  }
}

std::vector<double> Dictionary::eval(std::span<const double> x) const {
  std::vector<double> out(size_);
  eval(x, out);
  return out;
}

DesignMatrix Dictionary::evaluate(const Matrix& rows, std::vector<int> labels) const {
  if (rows.rows() > 0 && rows.cols() != dim_) {
    throw StructuralError(fmt::format("data has {} features; dictionary expects {}", rows.cols(), dim_));
  }
  DesignMatrix dm{Matrix(rows.rows(), size_), std::move(labels)};
  for (std::size_t i = 0; i < rows.rows(); ++i) eval(rows.row(i), dm.phi.row(i));
  dm.validate();
  return dm;
}

Dictionary Dictionary::with_estimated_sup_norm(const DesignMatrix& train) const {
  if (!sup_norm_.estimated) return *this;
  Dictionary copy = *this;
  double largest = 0.0;
  for (double v : train.phi.data()) largest = std::max(largest, std::abs(v));
  copy.sup_norm_ = {largest, true};
  return copy;
}

Dictionary Dictionary::with_sup_norm(SupNorm sup_norm) const {
  Dictionary copy = *this;
  copy.sup_norm_ = sup_norm;
  return copy;
}

std::pair<std::vector<double>, std::vector<double>> bounding_box(const Matrix& rows) {
  std::vector<double> lo(rows.cols(), std::numeric_limits<double>::infinity());
  std::vector<double> hi(rows.cols(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    for (std::size_t a = 0; a < rows.cols(); ++a) {
      lo[a] = std::min(lo[a], rows(i, a));
      hi[a] = std::max(hi[a], rows(i, a));
    }
  }
  return {lo, hi};
}

}  // namespace rsvm
