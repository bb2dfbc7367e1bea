#include "volterra/test_signals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "volterra/errors.hpp"

namespace volterra {

void TestFamilySpec::validate() const {
  if (m < 2) throw ConfigError("test family order m must be >= 2");
  if (amplitudes.size() != static_cast<std::size_t>(m)) {
    throw ConfigError("test family of order " + std::to_string(m) + " needs " + std::to_string(m) + " amplitudes");
  }
  if (omegas.size() != static_cast<std::size_t>(m - 1)) {
    throw ConfigError("test family of order " + std::to_string(m) + " needs " + std::to_string(m - 1) +
                      " durations");
  }
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    if (amplitudes[i] == 0.0) throw ConfigError("test amplitudes must be nonzero");
    for (std::size_t j = 0; j < i; ++j) {
      if (amplitudes[i] == amplitudes[j]) throw ConfigError("test amplitudes must be distinct");
    }
  }
  for (double w : omegas) {
    if (!(w >= 0.0)) throw ConfigError("test durations must be nonnegative");
  }
}

std::size_t aligned_cells(double omega, const TimeGrid& grid) {
  const double cells = omega / grid.h();
  const double rounded = std::round(cells);
  if (rounded < 1.0 || std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells)) {
    throw ConfigError("duration " + std::to_string(omega) + " is not a positive multiple of h = " +
                      std::to_string(grid.h()));
  }
  return static_cast<std::size_t>(rounded);
}

SampledSignal family_signal(double amplitude, std::span<const std::size_t> widths, const TimeGrid& grid) {
  const std::size_t total = std::accumulate(widths.begin(), widths.end(), std::size_t{0});
  if (total > grid.n()) throw ConfigError("test signal breakpoints exceed the horizon");
  std::vector<double> v(grid.n(), 0.0);
  std::size_t cell = 0;
  double sign = 1.0;
  // Plateau j carries (-1)^j; the signal is zero after the last breakpoint.
  for (std::size_t w : widths) {
    for (std::size_t k = 0; k < w; ++k) v[cell++] = sign * amplitude;
    sign = -sign;
  }
  return SampledSignal(grid, Placement::midpoints, std::move(v));
}

SampledSignal build_signal(const TestFamilySpec& spec, std::size_t k, const TimeGrid& grid) {
  spec.validate();
  if (k >= spec.amplitudes.size()) throw ConfigError("amplitude index out of range");
  std::vector<std::size_t> widths;
  widths.reserve(spec.omegas.size());
  for (double w : spec.omegas) widths.push_back(aligned_cells(w, grid));
  return family_signal(spec.amplitudes[k], widths, grid);
}

AmplitudeReport validate_amplitudes(const TestFamilySpec& spec, bool pi_mode) {
  AmplitudeReport r;
  if (pi_mode) return r;
  if (spec.m != 2 && spec.m != 3) {
    r.ok = false;
    r.message = "amplitude constraint is defined for m = 2 and m = 3 only";
    return r;
  }
  double sum = 0.0;
  double scale = 0.0;
  for (double a : spec.amplitudes) {
    sum += a;
    scale = std::max(scale, std::abs(a));
  }
  if (std::abs(sum) > 1e-12 * scale) {
    r.ok = false;
    r.message = spec.m == 2 ? "alpha_1 + alpha_2 must vanish" : "alpha_1 + alpha_2 + alpha_3 must vanish";
    r.message += " (sum = " + std::to_string(sum) + ")";
  }
  return r;
}

}  // namespace volterra
