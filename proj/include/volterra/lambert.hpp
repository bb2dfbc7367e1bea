#pragma once

namespace volterra::lambert {

/// Real branches of the inverse of z -> z e^z.
enum class Branch {
  principal,  ///< W_0 on [-1/e, inf), values >= -1
  minus_one,  ///< W_{-1} on [-1/e, 0), values <= -1
};

inline constexpr double branch_point = -0.36787944117144233;  // -1/e

/// W_b(y) by Halley iteration. Arguments within 1e-15 below -1/e are
/// clamped to the branch point. Throws NumericalError outside the branch
/// domain or when the iteration does not settle within 50 steps.
double w(Branch branch, double y);

/// W'(y) = W / ((1 + W) y), with W'(0) = 1 on the principal branch.
/// The derivative is unbounded at y = -1/e, where an ExistenceError is thrown.
double w_derivative(Branch branch, double y);

/// Partial sum of the Taylor series of W_0 about 0:
/// sum_{k=1..terms} (-k)^(k-1) / k! * y^k. Converges for |y| < 1/e.
double w_series(double y, int terms);

/// Coefficient (-k)^(k-1) / k! of y^k in the series above.
double series_coefficient(int k);

}  // namespace volterra::lambert
