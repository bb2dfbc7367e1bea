#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "volterra/grid.hpp"
#include "volterra/kernels.hpp"
#include "volterra/simulation.hpp"

namespace volterra {

/// Values on the (t, omega_1) lattice: node i = 1..n, window width l = 1..i.
class Lattice2 {
 public:
  explicit Lattice2(std::size_t n = 0) : n_(n), v_(n * (n + 1) / 2, 0.0) {}

  std::size_t n() const noexcept { return n_; }
  /// l = 0 (empty window) and i = 0 read as zero.
  double at(std::size_t i, std::size_t l) const { return (i == 0 || l == 0) ? 0.0 : v_[index(i, l)]; }
  double& operator()(std::size_t i, std::size_t l) { return v_[index(i, l)]; }
  std::vector<double>& raw() & noexcept { return v_; }
  const std::vector<double>& raw() const& noexcept { return v_; }
  std::vector<double> raw() && { return std::move(v_); }

 private:
  static std::size_t index(std::size_t i, std::size_t l) noexcept { return (i - 1) * i / 2 + (l - 1); }
  std::size_t n_;
  std::vector<double> v_;
};

/// Values on the (t, omega_1, omega_2) lattice: node i = 1..n, l1 = 1..i,
/// l2 = 0..i-l1. Entries with l2 = 0 are single-window responses.
class Lattice3 {
 public:
  explicit Lattice3(std::size_t n = 0);

  std::size_t n() const noexcept { return n_; }
  /// Node 0 reads as zero.
  double at(std::size_t i, std::size_t l1, std::size_t l2) const { return i == 0 ? 0.0 : v_[index(i, l1, l2)]; }
  double& operator()(std::size_t i, std::size_t l1, std::size_t l2) { return v_[index(i, l1, l2)]; }
  std::vector<double>& raw() & noexcept { return v_; }
  const std::vector<double>& raw() const& noexcept { return v_; }
  std::vector<double> raw() && { return std::move(v_); }

 private:
  std::size_t index(std::size_t i, std::size_t l1, std::size_t l2) const noexcept {
    return offset_[i] + (l1 - 1) * (2 * i - l1 + 2) / 2 + l2;
  }
  std::size_t n_;
  std::vector<std::size_t> offset_;
  std::vector<double> v_;
};

/// Responses to the order-2 family, one lattice per amplitude.
struct ResponseTable2 {
  TimeGrid grid;
  std::vector<double> amplitudes;
  std::vector<Lattice2> y;
};

/// Responses to the order-3 family, one lattice per amplitude.
struct ResponseTable3 {
  TimeGrid grid;
  std::vector<double> amplitudes;
  std::vector<Lattice3> y;
};

using ScalarSystem = std::function<SampledSignal(const SampledSignal&)>;
using VectorSystem = std::function<SampledSignal(std::span<const SampledSignal>)>;

/// Runs the system on every member alpha_k [I(t) - I(t - l h)], l = 1..n.
ResponseTable2 collect_responses2(const ScalarSystem& system, const TimeGrid& grid, std::vector<double> amplitudes);

/// Runs the system on every member alpha_k [I(t) - 2 I(t - l1 h) + I(t - (l1 + l2) h)],
/// l1 >= 1, l2 >= 0, l1 + l2 <= n.
ResponseTable3 collect_responses3(const ScalarSystem& system, const TimeGrid& grid, std::vector<double> amplitudes);

/// Splits y^{alpha_k} = sum_p alpha_k^p f_p at every lattice point
/// (Vandermonde solve). Returns f_1..f_m with m the amplitude count.
std::vector<Lattice2> extract_components(const ResponseTable2& table);
std::vector<Lattice3> extract_components(const ResponseTable3& table);

/// Plain Vandermonde split of one set of responses; used by both overloads.
std::vector<double> extract_point(std::span<const double> amplitudes, std::span<const double> responses);

/// K1 at cell midpoints from the response y (nodes) to alpha I(t).
Kernel1 invert_k1(const SampledSignal& step_response, double alpha);

/// Cell weights from component tables:
/// m_j from step entries f1(j, j), l_ab by 2-D inclusion-exclusion of window
/// sums, c_abc by differences of signed triple-window sums.
std::vector<double> linear_weights(const Lattice2& f1);
SymmetricTable2 quadratic_weights(const Lattice2& f2);
SymmetricTable3 cubic_weights(const Lattice3& f3);

/// Grid kernels K_m = weights / h^m. Need n >= 3 (K2) and n >= 4 (K3).
Kernel2 invert_k2(const Lattice2& f2, const TimeGrid& grid);
Kernel3 invert_k3(const Lattice3& f3, const TimeGrid& grid);

/// Kernel formulas applied to closed-form components by central differences
/// with step d: K2(t, t-w) = (f_tw + f_ww)/2 and
/// K3(t, t-w1, t-w1-w2) = (f_tw2w2 - f_tw1w2 + f_w1w2w2 - f_w1w1w2)/12.
double k2_from_derivatives(const std::function<double(double, double)>& f2, double t, double w, double d);
double k3_from_derivatives(const std::function<double(double, double, double)>& f3, double t, double w1, double w2,
                           double d);
/// Same kernel in lag variables: K3(s1, s2, s3) = -1/12 d^3/ds1 ds2 ds3 of
/// f3(s1, s1 - s2, s2 - s3).
double k3_compact(const std::function<double(double, double, double)>& f3, double s1, double s2, double s3, double d);

/// Product-integration weights from two (resp. three) distinct amplitudes.
PiWeights identify_pi_quadratic(const ResponseTable2& table);
PiWeights identify_pi_cubic(const ResponseTable3& table);

/// Grid-kernel models. The amplitudes must sum to zero.
VolterraModel identify_quadratic(const ResponseTable2& table);
VolterraModel identify_cubic(const ResponseTable3& table);

/// Midpoint-mode model with grid kernels K_m = weights / h^m.
VolterraModel kernels_from_weights(const PiWeights& w, int degree);

/// Identifies a p-channel quadratic model. Channel c uses amplitudes
/// channel_amplitudes[c] (two distinct values) for its own kernels; cross
/// kernels come from paired steps of the first amplitude of each channel,
/// one channel delayed by 0..n-1 cells, minus both single-channel responses.
VectorQuadraticModel identify_vector_quadratic(const VectorSystem& system, const TimeGrid& grid, std::size_t p,
                                               const std::vector<std::vector<double>>& channel_amplitudes);

}  // namespace volterra
