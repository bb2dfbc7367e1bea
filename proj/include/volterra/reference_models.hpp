#pragma once

#include <functional>
#include <optional>

#include "volterra/grid.hpp"

namespace volterra {

/// A differentiable signal given in closed form.
struct AnalyticSignal {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

/// The exponential reference system y = sum_{m<=N} Theta^m / m!, with all
/// kernels K_m = 1/m!. An empty order means the full series e^Theta - 1.
struct RefModel {
  std::optional<int> order;

  static RefModel truncated(int n);
  static RefModel infinite() { return RefModel{}; }
};

/// Node-placed response of the reference system to a midpoint-placed input.
SampledSignal ref_response(const RefModel& model, const SampledSignal& x);

/// x = y' / (1 + y) for the infinite reference system. Grid data is
/// differentiated numerically; returns node-placed x. Throws ExistenceError
/// naming the first node where y <= -1.
SampledSignal ref_inverse(const SampledSignal& y);
SampledSignal ref_inverse(const AnalyticSignal& y, const TimeGrid& grid);

/// y = Theta e^Theta (all kernels K_m = 1/(m-1)!).
SampledSignal factored_response(const SampledSignal& x);

/// x = W0(y) y' / ((1 + W0(y)) y), with x = y' where y = 0. Throws
/// ExistenceError at the first node where y <= -1/e.
SampledSignal factored_inverse(const SampledSignal& y);
SampledSignal factored_inverse(const AnalyticSignal& y, const TimeGrid& grid);

/// W0(y)/y, continuous through y = 0.
double lambert_ratio(double y);

/// Stationary-state constants of the heat-exchanger section.
struct HeatExchangerParams {
  double lambda1 = 0.1;  ///< 1/kg, illustrative default
  double lambda2 = 1.0;  ///< 1/kg, illustrative default
  double D0 = 0.16;      ///< kg/s
  double Q0 = 100.0;     ///< kW
  double i0 = 434.0;     ///< kJ/kg

  void validate() const;
};

/// Output enthalpy deviation (kJ/kg) at the nodes for flow-rate deviation dD
/// (kg/s) and heat-supply deviation dQ (kW), both midpoint-placed on one grid.
/// Inner flow integrals are exact for piecewise-constant flow; the outer
/// integral uses the trapezium rule on the exponential factor per cell.
SampledSignal hx_response(const HeatExchangerParams& p, const SampledSignal& dD, const SampledSignal& dQ);

/// Closed-form response to dD = 0, dQ = q (constant), for checking.
double hx_constant_heat_response(const HeatExchangerParams& p, double q, double t);

}  // namespace volterra
