#include "rejectsvm/matrix.hpp"

#include <cmath>

#include "rejectsvm/errors.hpp"

namespace rsvm {

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw StructuralError("appended row has the wrong length");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace rsvm
