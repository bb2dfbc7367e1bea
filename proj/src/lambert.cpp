#include "volterra/lambert.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "volterra/errors.hpp"

namespace volterra::lambert {
namespace {

constexpr int max_iterations = 50;
constexpr double step_tolerance = 1e-15;
constexpr double clamp_slack = 1e-15;

// Expansion about the branch point in p = sqrt(2(e y + 1)); the minus_one
// branch is the same series in -p.
double branch_point_series(double p) {
  return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0 + p * (769.0 / 17280.0)))));
}

double initial_guess(Branch branch, double y, double p) {
  if (branch == Branch::principal) {
    if (p < 0.5) return branch_point_series(p);
    if (std::abs(y) < 0.3) return y * (1.0 + y * (-1.0 + 1.5 * y));
    if (y < 3.0) return std::log1p(y) * 0.8;
    const double l1 = std::log(y);
    const double l2 = std::log(l1);
    return l1 - l2 + l2 / l1;
  }
  if (y < -0.25) return branch_point_series(-p);
  const double l1 = std::log(-y);
  const double l2 = std::log(-l1);
  return l1 - l2 + l2 / l1;
}

std::string describe(Branch b) { return b == Branch::principal ? "W_0" : "W_-1"; }

}  // namespace

double w(Branch branch, double y) {
  if (std::isnan(y)) throw NumericalError("Lambert " + describe(branch) + " of NaN");
  if (y < branch_point - clamp_slack) {
    throw NumericalError("Lambert " + describe(branch) + " undefined below -1/e (y = " + std::to_string(y) + ")");
  }
  if (branch == Branch::minus_one && y >= 0.0) {
    throw NumericalError("Lambert W_-1 is defined only on [-1/e, 0) (y = " + std::to_string(y) + ")");
  }
  if (y <= branch_point) return -1.0;
  if (branch == Branch::principal && y == 0.0) return 0.0;
  if (std::isinf(y)) return y;

  const double p = std::sqrt(std::max(0.0, 2.0 * (std::numbers::e * y + 1.0)));
  // So close to -1/e that the expansion is exact to rounding, and Halley's
  // step degenerates (W' is unbounded there).
  if (p < 1e-3) return branch_point_series(branch == Branch::principal ? p : -p);

  double z = initial_guess(branch, y, p);
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    const double ez = std::exp(z);
    const double f = z * ez - y;
    if (f == 0.0) return z;
    const double zp1 = z + 1.0;
    const double dz = f / (ez * zp1 - (z + 2.0) * f / (2.0 * zp1));
    // Near the branch point the residual is pure rounding noise and the
    // step stops shrinking.
    if (std::abs(dz) >= last_step && std::abs(f) <= 8.0 * std::numeric_limits<double>::epsilon() * std::abs(y)) {
      return z;
    }
    z -= dz;
    if (std::abs(dz) <= step_tolerance * std::abs(z)) return z;
    last_step = std::abs(dz);
  }
  throw NumericalError("Lambert " + describe(branch) + " iteration did not converge for y = " + std::to_string(y));
}

double w_derivative(Branch branch, double y) {
  if (branch == Branch::principal && y == 0.0) return 1.0;
  if (y <= branch_point + clamp_slack && y >= branch_point - clamp_slack) {
    throw ExistenceError("Lambert derivative is unbounded at y = -1/e", y);
  }
  const double wy = w(branch, y);
  return wy / ((1.0 + wy) * y);
}

double series_coefficient(int k) {
  if (k < 1) return 0.0;
  const double magnitude = std::exp((k - 1) * std::log(static_cast<double>(k)) - std::lgamma(k + 1.0));
  return (k % 2 == 1) ? magnitude : -magnitude;
}

double w_series(double y, int terms) {
  double sum = 0.0;
  double power = 1.0;
  for (int k = 1; k <= terms; ++k) {
    power *= y;
    sum += series_coefficient(k) * power;
  }
  return sum;
}

}  // namespace volterra::lambert
