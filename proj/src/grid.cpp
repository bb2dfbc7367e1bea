#include "volterra/grid.hpp"

#include <cmath>
#include <string>

#include "volterra/errors.hpp"

namespace volterra {

TimeGrid::TimeGrid(double h, std::size_t n) : h_(h), n_(n) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("grid step h must be positive and finite");
  if (n < 1) throw ConfigError("grid needs at least one cell");
}

SampledSignal::SampledSignal(TimeGrid grid, Placement placement, std::vector<double> values)
    : grid_(grid), placement_(placement), values_(std::move(values)) {
  const std::size_t expected = placement == Placement::midpoints ? grid_.n() : grid_.n() + 1;
  if (values_.size() != expected) {
    throw ConfigError("signal length " + std::to_string(values_.size()) + " does not match grid (expected " +
                      std::to_string(expected) + ")");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw NumericalError("non-finite signal value at index " + std::to_string(i));
  }
}

SampledSignal SampledSignal::zeros(TimeGrid grid, Placement placement) {
  const std::size_t len = placement == Placement::midpoints ? grid.n() : grid.n() + 1;
  return SampledSignal(grid, placement, std::vector<double>(len, 0.0));
}

double SampledSignal::time(std::size_t i) const noexcept {
  return placement_ == Placement::midpoints ? grid_.midpoint(i + 1) : grid_.node(i);
}

SampledSignal sample_midpoints(const TimeGrid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.n());
  for (std::size_t c = 1; c <= grid.n(); ++c) v[c - 1] = f(grid.midpoint(c));
  return SampledSignal(grid, Placement::midpoints, std::move(v));
}

SampledSignal sample_nodes(const TimeGrid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.n() + 1);
  for (std::size_t i = 0; i <= grid.n(); ++i) v[i] = f(grid.node(i));
  return SampledSignal(grid, Placement::nodes, std::move(v));
}

void require_placement(const SampledSignal& s, Placement placement, const char* what) {
  if (s.placement() != placement) {
    throw ConfigError(std::string(what) + ": expected " +
                      (placement == Placement::midpoints ? "midpoint" : "node") + "-placed signal");
  }
}

SampledSignal cumulative_integral(const SampledSignal& x) {
  require_placement(x, Placement::midpoints, "cumulative_integral");
  const auto& g = x.grid();
  std::vector<double> theta(g.n() + 1, 0.0);
  double sum = 0.0;
  for (std::size_t c = 1; c <= g.n(); ++c) {
    sum += x[c - 1];
    theta[c] = g.h() * sum;
  }
  return SampledSignal(g, Placement::nodes, std::move(theta));
}

SampledSignal node_derivative(const SampledSignal& y) {
  require_placement(y, Placement::nodes, "node_derivative");
  const auto& g = y.grid();
  const std::size_t n = g.n();
  const double h = g.h();
  std::vector<double> d(n + 1);
  if (n == 1) {
    d[0] = d[1] = (y[1] - y[0]) / h;
  } else {
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    d[n] = (3.0 * y[n] - 4.0 * y[n - 1] + y[n - 2]) / (2.0 * h);
    for (std::size_t i = 1; i < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
  }
  return SampledSignal(g, Placement::nodes, std::move(d));
}

}  // namespace volterra
