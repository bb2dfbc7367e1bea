#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "volterra/grid.hpp"

namespace volterra {

/// Parameters of an (m-1)-parameter family of piecewise-constant test
/// inputs: alpha_k [ I(t) - 2 I(t - beta_1) + 2 I(t - beta_2) ... +/- I(t - beta_{m-1}) ]
/// with beta_i = omega_1 + ... + omega_i.
struct TestFamilySpec {
  int m = 2;
  std::vector<double> amplitudes;  ///< alpha_1..alpha_m, distinct and nonzero
  std::vector<double> omegas;      ///< omega_1..omega_{m-1}, seconds

  /// Throws ConfigError on wrong sizes, repeated or zero amplitudes, or
  /// negative durations.
  void validate() const;
};

/// Midpoint samples of family member `k` (0-based amplitude index). Every
/// omega must be a positive multiple of the grid step and the breakpoints
/// must fit the horizon.
SampledSignal build_signal(const TestFamilySpec& spec, std::size_t k, const TimeGrid& grid);

/// Same family on the lattice: plateau widths given in cells. Widths may be
/// zero, in which case that plateau is absent (the degenerate members used
/// by the identification tables).
SampledSignal family_signal(double amplitude, std::span<const std::size_t> widths, const TimeGrid& grid);

/// Cell count of a duration that must be a positive multiple of h.
std::size_t aligned_cells(double omega, const TimeGrid& grid);

struct AmplitudeReport {
  bool ok = true;
  std::string message;
};

/// Checks the solvability constraint sum(alpha) = 0 required for the
/// continuous-kernel inversion (m = 2 and m = 3). Product-integration
/// identification does not need it; `pi_mode` skips the check.
AmplitudeReport validate_amplitudes(const TestFamilySpec& spec, bool pi_mode = false);

}  // namespace volterra
