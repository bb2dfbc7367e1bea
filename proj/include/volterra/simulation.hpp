#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "volterra/grid.hpp"
#include "volterra/kernels.hpp"

namespace volterra {

/// Elementary kernel integrals over grid cells:
/// m_j = int_{cell j} K1, l_jk = int int_{cell j x cell k} K2, c_jkl likewise.
struct PiWeights {
  TimeGrid grid;
  std::vector<double> m;
  SymmetricTable2 l;
  std::optional<SymmetricTable3> c;

  explicit PiWeights(TimeGrid g, bool cubic = false);
};

/// Weights of constant kernels, exact: m_j = k1 h, l_jk = k2 h^2, c_jkl = k3 h^3.
PiWeights constant_kernel_weights(const TimeGrid& grid, double k1, double k2, std::optional<double> k3 = {});

enum class Discretization { midpoint, product_integration };

/// Stationary Volterra polynomial of degree 1..3.
struct VolterraModel {
  int degree = 1;
  Discretization mode = Discretization::midpoint;
  std::optional<Kernel1> k1;
  std::optional<Kernel2> k2;
  std::optional<Kernel3> k3;
  std::optional<PiWeights> weights;

  static VolterraModel linear(Kernel1 k1);
  static VolterraModel quadratic(Kernel1 k1, Kernel2 k2);
  static VolterraModel cubic(Kernel1 k1, Kernel2 k2, Kernel3 k3);
  static VolterraModel product_integration(PiWeights w, int degree);

  void validate() const;
};

/// Cell weights used for a simulation on `grid`: the stored PI weights, or
/// midpoint values times h^m.
PiWeights quadrature_weights(const VolterraModel& model, const TimeGrid& grid);

/// Response at the nodes (index 0 is t = 0, always 0).
SampledSignal simulate(const VolterraModel& model, const SampledSignal& x);

/// The degree-1, -2 and -3 contributions separately (absent degrees are zero).
std::array<SampledSignal, 3> simulate_terms(const VolterraModel& model, const SampledSignal& x);

/// Cubic convolution sum using symmetry over ordered triples.
double cubic_term_at(const SymmetricTable3& c, std::span<const double> x, std::size_t i);
/// Straight triple sum over all index triples, for cross-checking.
double cubic_term_naive(const SymmetricTable3& c, std::span<const double> x, std::size_t i);

/// Quadratic model with p input channels. Cross kernels K_ji are keyed by
/// (j, i) with j < i (0-based channels); missing pairs are zero.
struct VectorQuadraticModel {
  std::size_t p = 2;
  std::vector<Kernel1> linear;
  std::vector<Kernel2> quadratic;
  std::map<std::pair<std::size_t, std::size_t>, CrossKernel> cross;

  void validate() const;
};

/// Cell weights of a vector model on a grid.
struct VectorWeights {
  TimeGrid grid;
  std::vector<std::vector<double>> linear;
  std::vector<SymmetricTable2> quadratic;
  std::map<std::pair<std::size_t, std::size_t>, DenseTable2> cross;
};

VectorWeights vector_weights(const VectorQuadraticModel& model, const TimeGrid& grid);

/// Output at node i for per-channel midpoint samples (each of length >= i).
double vector_output_at(const VectorWeights& w, std::span<const std::span<const double>> x, std::size_t i);

SampledSignal simulate_vector(const VectorQuadraticModel& model, std::span<const SampledSignal> x);
SampledSignal simulate_vector(const VectorWeights& w, std::span<const SampledSignal> x);

struct ConvergenceRow {
  double h = 0.0;
  double error = 0.0;
  double order = 0.0;  ///< log2 ratio against the previous row (0 for the first)
};

/// Max nodal error against a self-reference on a grid four times finer than
/// the finest requested step, for each step in `steps` (coarse to fine).
/// Every step must be an integer multiple of the reference step.
std::vector<ConvergenceRow> convergence_probe(const VolterraModel& model, const std::function<double(double)>& x,
                                              double horizon, std::span<const double> steps);

}  // namespace volterra
