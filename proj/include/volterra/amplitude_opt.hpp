#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace volterra {

// Closed-form residuals (reference minus model at t = T) for a test amplitude
// set and a validation step of height beta.

/// (beta^3 - alpha^2 beta) T^3 / 6
double residual_3sq(double alpha, double beta, double T);
/// (beta^3 - (a1 + a2) beta^2 + a1 a2 beta) T^3 / 6
double residual_3sq_pi(double a1, double a2, double beta, double T);
/// (beta^3 - beta alpha^2)(w2 - w1)^3 / 6 - beta alpha^2 w1 w2^2 for the signal
/// beta on a leading plateau of width w2, -beta on a trailing plateau of width w1
double residual_3sq_twostep(double alpha, double beta, double w1, double w2);
/// {beta^4 + [a1 a2 - (a1^2 + a1 a2 + a2^2)] beta^2 + a1 a2 (a1 + a2) beta} T^4 / 24
double residual_4cub(double a1, double a2, double beta, double T);
/// {beta^4 - s1 beta^3 + s2 beta^2 - s3 beta} T^4 / 24 with s_k the elementary
/// symmetric polynomials of (a1, a2, a3)
double residual_4cub_pi(double a1, double a2, double a3, double beta, double T);
/// Quadratic model identified with (alpha, -alpha) against the N-truncated
/// reference: sum_{m=3..N} T^m/m! (beta^m - beta^p alpha^(m-p)), p = 1 for
/// odd m and 2 for even m.
double residual_stabilization(double alpha, double beta, double T, int N);

enum class AmplitudeBox {
  positive,   ///< (0, B], realised as [1e-9 B, B]
  symmetric,  ///< [-B, B]
};

enum class Constraint {
  none,
  sum_zero,  ///< one extra amplitude, minus the sum of the free ones, is appended
};

struct MinimaxProblem {
  std::string name;
  std::size_t free_amplitudes = 1;
  AmplitudeBox box = AmplitudeBox::positive;
  Constraint constraint = Constraint::none;
  double B = 1.0;
  double T = 1.0;
  /// Inner maximisation also runs over (w1, w2) with w1, w2 >= 0, w1 + w2 <= T.
  bool has_omegas = false;
  /// Residual of the full amplitude vector (free plus implied).
  std::function<double(std::span<const double> alpha, double beta, double w1, double w2)> residual;

  void validate() const;
  std::vector<double> full_amplitudes(std::span<const double> free) const;
};

struct InnerMax {
  double value = 0.0;  ///< max |residual|
  double beta = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  /// Every local maximiser in beta within 1e-3 relative of the max (empty
  /// for problems with omegas).
  std::vector<double> maximizers;
  /// Same for problems with omegas, as (beta, w1, w2).
  std::vector<std::array<double, 3>> omega_maximizers;
};

struct MinimaxResult {
  std::vector<double> alpha;  ///< full amplitude vector
  double value = 0.0;
  InnerMax worst;
  std::size_t evaluations = 0;
};

/// max over beta in [0, B] (and omegas) of |residual(alpha, .)|.
InnerMax inner_max(const MinimaxProblem& problem, std::span<const double> alpha);

/// Nested minimax: 21-point multistart per free amplitude, refinement of the
/// best starts by pattern search down to tol (in units of B). Ties resolve to
/// the lexicographically smallest amplitudes.
MinimaxResult solve_minimax(const MinimaxProblem& problem, double tol = 1e-4);

MinimaxProblem problem_3sq(double B, double T);
MinimaxProblem problem_3sq_pi(double B, double T);
/// PI residual restricted by alpha_1 + alpha_2 = 0 over [-B, B].
MinimaxProblem problem_3sq_pi_constrained(double B, double T);
MinimaxProblem problem_3sq_twostep(double B, double T);
MinimaxProblem problem_4cub(double B, double T);
MinimaxProblem problem_4cub_pi(double B, double T);
MinimaxProblem problem_stabilization(int N, double B, double T);

/// Accepts 3sq, 3sq_pi, 3sq_twostep, 4cub, 4cub_pi. Throws ConfigError otherwise.
MinimaxProblem problem_by_name(const std::string& name, double B, double T);

struct StabilizationRow {
  int N = 0;
  double alpha = 0.0;
  double value = 0.0;
};

/// alpha*_N for N = n_min..n_max at the given B, T.
std::vector<StabilizationRow> stabilization_probe(int n_min, int n_max, double B = 1.0, double T = 1.0);

}  // namespace volterra
