#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "volterra/grid.hpp"
#include "volterra/reference_models.hpp"

namespace volterra {

/// Polynomial Volterra equation of the first kind of degree 1..3:
/// int K1(t,s) x(s) ds + int int K2(t,s1,s2) x x + int int int K3 x x x = y(t).
/// Kernels are general (non-stationary) handles; K2, K3 symmetric in s.
struct PolyEquation {
  using K1Fn = std::function<double(double, double)>;
  using K2Fn = std::function<double(double, double, double)>;
  using K3Fn = std::function<double(double, double, double, double)>;

  int degree = 2;
  K1Fn k1;
  K2Fn k2;
  K3Fn k3;
  /// Right-hand side with y(0) = 0; the derivative is optional.
  AnalyticSignal y;

  /// K1 = 1, K2 = lambda: int x + lambda (int x)^2 = y.
  static PolyEquation quadratic_const(double lambda, AnalyticSignal y);
  /// K1 = 1 - L1 (t - s), K2 = -lambda, y = F t.
  static PolyEquation quadratic_linear_kernel(double L1, double lambda, double F);

  /// Throws ConfigError for a missing kernel, degree outside 1..3 or y(0) != 0.
  void validate() const;
};

/// x = y' / sqrt(1 + 4 lambda y) at the nodes; lambda = 0 gives x = y'.
/// Throws ExistenceError at the first node where 4 lambda y <= -1.
SampledSignal invert_quadratic_const(double lambda, const AnalyticSignal& y, const TimeGrid& grid);
/// Same for node samples of y (derivative by finite differences).
SampledSignal invert_quadratic_const(double lambda, const SampledSignal& y);

/// Outcome of a blow-up search.
struct BlowupEstimate {
  bool found = false;
  double t_star = 0.0;  ///< meaningful when found
  std::string method;
};

/// Root of T F(T) = 1 / (4 |lambda|) by doubling bracket and bisection to
/// rel. 1e-14. F must be nonnegative and nondecreasing. Not found when the
/// root lies beyond `cap`.
BlowupEstimate blowup_simple(double lambda, const std::function<double(double)>& F, double cap = 1e6);

/// Exact solution of int (1 - L1 (t - s)) x ds - lambda (int x)^2 = F t.
struct LinearKernelSolution {
  double x = 0.0;      ///< x(t)
  double theta = 0.0;  ///< int_0^t x
};

/// Principal-branch Lambert solution at time t. Needs L1, lambda, F > 0 and
/// t < T*; throws ExistenceError at or beyond T*.
LinearKernelSolution invert_quadratic_linear_kernel(double L1, double lambda, double F, double t);

/// T* = (L1 + 2 lambda F) / L1^2 ln(1 + L1 / (2 lambda F)) - 1 / L1.
double linear_kernel_blowup(double L1, double lambda, double F);

enum class Quadrature {
  midpoint,         ///< unknowns at cell midpoints
  right_rectangle,  ///< unknowns at the right node of each cell
};

/// Marching solution on a grid.
struct NumericSolution {
  Quadrature rule = Quadrature::midpoint;
  TimeGrid grid;
  /// Abscissae of the unknowns: cell midpoints or nodes h..nh.
  std::vector<double> t;
  std::vector<double> x;

  /// The midpoint solution as a signal (right-rectangle values are placed on
  /// the cells they close).
  SampledSignal signal() const;
};

/// Node-by-node solve of the discretised equation for degree 1 or 2. At
/// node i the unknown satisfies a u^2 + b u = c; the first node takes the
/// root nearest y'(0)/K1(0,0), later nodes the root nearest the previous
/// value. Throws ExistenceError at the first node with a negative
/// discriminant (or vanishing linear coefficient).
NumericSolution solve_numeric(const PolyEquation& eq, const TimeGrid& grid,
                              Quadrature rule = Quadrature::midpoint);

/// Coefficients of the majorant Cauchy problem
/// Theta' = (F + sum_m L_m Theta^m) / (1 - sum_{m>=2} m M_m Theta^(m-1)).
/// Empty functions read as zero.
struct MajorantSpec {
  int degree = 2;
  std::function<double(double)> F;
  std::vector<std::function<double(double)>> L;  ///< L[m-1], m = 1..degree
  std::vector<std::function<double(double)>> M;  ///< M[m-2], m = 2..degree

  /// Constant coefficients.
  static MajorantSpec constant(int degree, double F, std::vector<double> L, std::vector<double> M);

  void validate() const;
  double numerator(double t, double theta) const;
  /// sum_{m>=2} m M_m(t) Theta^(m-1); the blow-up event is where it reaches 1.
  double event(double t, double theta) const;
};

struct MajorantResult {
  bool blowup = false;
  double t_star = 0.0;  ///< event time, or the horizon when no blow-up
  std::vector<double> t;
  std::vector<double> theta;
  std::vector<double> psi;  ///< Theta', the majorant of |x|
  std::string method;
  /// Right-hand side of the Cauchy problem, psi = rate(t, Theta).
  std::function<double(double, double)> rate;

  /// psi at time t from the cubic Hermite interpolant of Theta; clamps to
  /// the trajectory ends.
  double psi_at(double t) const;
};

/// Adaptive Dormand-Prince integration of the majorant problem. Once the
/// denominator drops below 0.1 the integration continues with Theta as the
/// independent variable (dt/dTheta stays bounded) and the event is located
/// by bisection. Stops at `horizon` when no event occurs. Steps in t are
/// capped at horizon / 500.
MajorantResult majorant_blowup(const MajorantSpec& spec, double horizon, double rtol = 1e-10);

/// Linear-equation stability constants.
struct StabilityConstants {
  double k = 1.0;   ///< min |K1(t,t)|
  double L1 = 0.0;  ///< max |dK1/dt|
};

/// (1/k) exp(L1 T / k).
double stability_bound(const StabilityConstants& c, double T);

/// k and L1 sampled on the grid nodes (dK1/dt by central differences).
StabilityConstants stability_constants(const PolyEquation::K1Fn& k1, const TimeGrid& grid);

/// Majorant coefficients sampled on the grid nodes: F(t) running max of |y'|,
/// L_m(t) running max of |dK_m/dt| and M_m(t) running max of the diagonal
/// |K_m(xi, xi, ...)|, all divided by |K1(t,t)|. Values between nodes are
/// those of the next node up. Sampled maxima are lower estimates of the
/// true maxima; refining the grid can only raise them.
MajorantSpec bounds_from_kernels(const PolyEquation& eq, const TimeGrid& grid);

}  // namespace volterra
