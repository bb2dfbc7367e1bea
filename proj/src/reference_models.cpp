#include "volterra/reference_models.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "volterra/errors.hpp"
#include "volterra/lambert.hpp"

namespace volterra {
namespace {

void require_zero_start(const SampledSignal& y, const char* what) {
  const double scale = std::max(1.0, std::abs(y[y.size() - 1]));
  if (std::abs(y[0]) > 1e-9 * scale) throw ConfigError(std::string(what) + ": right-hand side must vanish at t = 0");
}

SampledSignal ref_inverse_impl(const SampledSignal& y, const SampledSignal& dy) {
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] <= -1.0) {
      throw ExistenceError("reference inversion loses continuity: y <= -1 at t = " + std::to_string(y.time(i)),
                           y.time(i));
    }
    x[i] = dy[i] / (1.0 + y[i]);
  }
  return SampledSignal(y.grid(), Placement::nodes, std::move(x));
}

SampledSignal factored_inverse_impl(const SampledSignal& y, const SampledSignal& dy) {
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] <= lambert::branch_point) {
      throw ExistenceError("factored inversion loses continuity: y <= -1/e at t = " + std::to_string(y.time(i)),
                           y.time(i));
    }
    const double w0 = lambert::w(lambert::Branch::principal, y[i]);
    x[i] = lambert_ratio(y[i]) * dy[i] / (1.0 + w0);
  }
  return SampledSignal(y.grid(), Placement::nodes, std::move(x));
}

}  // namespace

RefModel RefModel::truncated(int n) {
  if (n < 1) throw ConfigError("reference model order must be >= 1");
  return RefModel{n};
}

SampledSignal ref_response(const RefModel& model, const SampledSignal& x) {
  const auto theta = cumulative_integral(x);
  std::vector<double> y(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double th = theta[i];
    if (!model.order) {
      y[i] = std::expm1(th);
      continue;
    }
    // Horner form of sum_{m=1..N} th^m / m!.
    double acc = 0.0;
    for (int m = *model.order; m >= 1; --m) acc = th / m * (1.0 + acc);
    y[i] = acc;
  }
  return SampledSignal(x.grid(), Placement::nodes, std::move(y));
}

SampledSignal ref_inverse(const SampledSignal& y) {
  require_placement(y, Placement::nodes, "ref_inverse");
  require_zero_start(y, "ref_inverse");
  return ref_inverse_impl(y, node_derivative(y));
}

SampledSignal ref_inverse(const AnalyticSignal& y, const TimeGrid& grid) {
  return ref_inverse_impl(sample_nodes(grid, y.value), sample_nodes(grid, y.derivative));
}

SampledSignal factored_response(const SampledSignal& x) {
  const auto theta = cumulative_integral(x);
  std::vector<double> y(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) y[i] = theta[i] * std::exp(theta[i]);
  return SampledSignal(x.grid(), Placement::nodes, std::move(y));
}

SampledSignal factored_inverse(const SampledSignal& y) {
  require_placement(y, Placement::nodes, "factored_inverse");
  require_zero_start(y, "factored_inverse");
  return factored_inverse_impl(y, node_derivative(y));
}

SampledSignal factored_inverse(const AnalyticSignal& y, const TimeGrid& grid) {
  return factored_inverse_impl(sample_nodes(grid, y.value), sample_nodes(grid, y.derivative));
}

double lambert_ratio(double y) {
  if (std::abs(y) < 1e-3) {
    return 1.0 + y * (-1.0 + y * (1.5 + y * (-8.0 / 3.0 + y * (125.0 / 24.0))));
  }
  return lambert::w(lambert::Branch::principal, y) / y;
}

void HeatExchangerParams::validate() const {
  if (lambda1 == lambda2) throw ConfigError("plant constants lambda1 and lambda2 must differ");
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw ConfigError("plant constants lambda1, lambda2 must be positive");
  if (!(D0 > 0.0)) throw ConfigError("stationary flow rate D0 must be positive");
  if (!(Q0 > 0.0)) throw ConfigError("stationary heat supply Q0 must be positive");
}

SampledSignal hx_response(const HeatExchangerParams& p, const SampledSignal& dD, const SampledSignal& dQ) {
  p.validate();
  require_placement(dD, Placement::midpoints, "hx_response flow input");
  require_placement(dQ, Placement::midpoints, "hx_response heat input");
  if (!(dD.grid() == dQ.grid())) throw ConfigError("hx_response inputs must share one grid");

  const auto& g = dD.grid();
  const std::size_t n = g.n();
  const double h = g.h();

  // Cumulative flow at the nodes, and the combined source term per cell.
  std::vector<double> flow(n + 1, 0.0);
  std::vector<double> source(n + 1, 0.0);
  for (std::size_t c = 1; c <= n; ++c) {
    const double d = p.D0 + dD[c - 1];
    if (!(d > 0.0)) {
      throw ExistenceError("total flow D0 + dD must stay positive (cell " + std::to_string(c) + ")", g.midpoint(c));
    }
    flow[c] = flow[c - 1] + h * d;
    source[c] = dQ[c - 1] - p.Q0 / p.D0 * dD[c - 1];
  }

  const double gain = p.lambda1 * p.lambda2 / (p.lambda2 - p.lambda1);
  auto decay = [&](double phi) { return std::exp(-p.lambda1 * phi) - std::exp(-p.lambda2 * phi); };

  std::vector<double> out(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    double sum = 0.0;
    for (std::size_t c = 1; c <= i; ++c) {
      if (source[c] == 0.0) continue;
      const double left = decay(flow[i] - flow[c - 1]);
      const double right = decay(flow[i] - flow[c]);
      sum += source[c] * 0.5 * h * (left + right);
    }
    out[i] = gain * sum;
  }
  return SampledSignal(g, Placement::nodes, std::move(out));
}

double hx_constant_heat_response(const HeatExchangerParams& p, double q, double t) {
  p.validate();
  const double a = p.lambda1 * p.D0;
  const double b = p.lambda2 * p.D0;
  const double gain = p.lambda1 * p.lambda2 / (p.lambda2 - p.lambda1);
  return q * gain * (-std::expm1(-a * t) / a + std::expm1(-b * t) / b);
}

}  // namespace volterra
