#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace volterra {

/// Uniform mesh on [0, T] with n cells of width h. Node i sits at i*h
/// (i = 0..n), cell i (1-based) spans [(i-1)h, ih] with midpoint (i-1/2)h.
class TimeGrid {
 public:
  TimeGrid(double h, std::size_t n);

  double h() const noexcept { return h_; }
  std::size_t n() const noexcept { return n_; }
  double horizon() const noexcept { return static_cast<double>(n_) * h_; }

  double node(std::size_t i) const noexcept { return static_cast<double>(i) * h_; }
  /// Midpoint of 1-based cell i.
  double midpoint(std::size_t i) const noexcept { return (static_cast<double>(i) - 0.5) * h_; }

  /// Same step, different cell count.
  TimeGrid resized(std::size_t n) const { return TimeGrid(h_, n); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double h_;
  std::size_t n_;
};

enum class Placement { midpoints, nodes };

/// Signal values on a grid. Midpoint signals hold n values (index c-1 for
/// cell c); node signals hold n+1 values with index 0 at t = 0.
class SampledSignal {
 public:
  SampledSignal(TimeGrid grid, Placement placement, std::vector<double> values);

  static SampledSignal zeros(TimeGrid grid, Placement placement);

  const TimeGrid& grid() const noexcept { return grid_; }
  Placement placement() const noexcept { return placement_; }
  std::span<const double> values() const& noexcept { return values_; }
  /// Temporaries hand over their storage, so `for (v : f().values())` is safe.
  std::vector<double> values() && { return std::move(values_); }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Time coordinate of sample i.
  double time(std::size_t i) const noexcept;

 private:
  TimeGrid grid_;
  Placement placement_;
  std::vector<double> values_;
};

SampledSignal sample_midpoints(const TimeGrid& grid, const std::function<double(double)>& f);
SampledSignal sample_nodes(const TimeGrid& grid, const std::function<double(double)>& f);

/// Running midpoint-rule integral Theta(ih) = h * sum_{c<=i} x_c; Theta(0) = 0.
SampledSignal cumulative_integral(const SampledSignal& x);

/// Derivative of a node signal: second-order central differences inside,
/// second-order one-sided differences at both ends. Needs n >= 2.
SampledSignal node_derivative(const SampledSignal& y);

/// Throws ConfigError unless `s` has the requested placement.
void require_placement(const SampledSignal& s, Placement placement, const char* what);

}  // namespace volterra
