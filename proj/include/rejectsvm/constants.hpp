#pragma once

namespace rsvm::tol {

// Absolute tolerance on constraint row residuals of an optimal LP solution.
inline constexpr double kFeasibility = 1e-7;
// Smallest admissible pivot element (and ratio-test denominator).
inline constexpr double kPivot = 1e-9;
// Reduced costs above -kOptimality are treated as non-negative.
inline constexpr double kOptimality = 1e-9;
// Any normalized pivot-row entry beyond this aborts the solve.
inline constexpr double kBlowUp = 1e12;
// Coefficients below this magnitude count as zero when reporting support size.
inline constexpr double kSupport = 1e-8;

}  // namespace rsvm::tol
