#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "volterra/grid.hpp"

namespace volterra {

/// Symmetric n x n table over 1-based cells; only a >= b is stored.
class SymmetricTable2 {
 public:
  explicit SymmetricTable2(std::size_t n = 0) : n_(n), v_(n * (n + 1) / 2, 0.0) {}

  std::size_t n() const noexcept { return n_; }
  double operator()(std::size_t a, std::size_t b) const { return v_[index(a, b)]; }
  double& operator()(std::size_t a, std::size_t b) { return v_[index(a, b)]; }
  const std::vector<double>& raw() const& noexcept { return v_; }
  std::vector<double> raw() && { return std::move(v_); }

 private:
  static std::size_t index(std::size_t a, std::size_t b) noexcept {
    if (a < b) std::swap(a, b);
    --a, --b;
    return a * (a + 1) / 2 + b;
  }
  std::size_t n_;
  std::vector<double> v_;
};

/// Fully symmetric n x n x n table; only a >= b >= c is stored.
class SymmetricTable3 {
 public:
  explicit SymmetricTable3(std::size_t n = 0) : n_(n), v_(n * (n + 1) * (n + 2) / 6, 0.0) {}

  std::size_t n() const noexcept { return n_; }
  double operator()(std::size_t a, std::size_t b, std::size_t c) const { return v_[index(a, b, c)]; }
  double& operator()(std::size_t a, std::size_t b, std::size_t c) { return v_[index(a, b, c)]; }
  const std::vector<double>& raw() const& noexcept { return v_; }
  std::vector<double> raw() && { return std::move(v_); }

 private:
  static std::size_t index(std::size_t a, std::size_t b, std::size_t c) noexcept {
    if (a < b) std::swap(a, b);
    if (b < c) std::swap(b, c);
    if (a < b) std::swap(a, b);
    --a, --b, --c;
    return a * (a + 1) * (a + 2) / 6 + b * (b + 1) / 2 + c;
  }
  std::size_t n_;
  std::vector<double> v_;
};

/// Plain row-major n x n table over 1-based cells (no symmetry assumed).
class DenseTable2 {
 public:
  explicit DenseTable2(std::size_t n = 0) : n_(n), v_(n * n, 0.0) {}

  std::size_t n() const noexcept { return n_; }
  double operator()(std::size_t a, std::size_t b) const { return v_[(a - 1) * n_ + (b - 1)]; }
  double& operator()(std::size_t a, std::size_t b) { return v_[(a - 1) * n_ + (b - 1)]; }

 private:
  std::size_t n_;
  std::vector<double> v_;
};

// Stationary kernels K_m(s_1..s_m) of lag arguments. Each is either an
// analytic handle or per-cell values on a grid (value of cell c stands for
// the kernel around the midpoint (c-1/2)h).

class Kernel1 {
 public:
  using Fn = std::function<double(double)>;

  static Kernel1 analytic(Fn f);
  static Kernel1 on_grid(TimeGrid grid, std::vector<double> cells);

  bool is_analytic() const noexcept { return std::holds_alternative<Fn>(rep_); }
  double operator()(double s) const;
  /// Cell values on `grid` (analytic: sampled at midpoints).
  std::vector<double> cell_values(const TimeGrid& grid) const;
  std::optional<TimeGrid> grid() const { return grid_; }

 private:
  std::variant<Fn, std::vector<double>> rep_;
  std::optional<TimeGrid> grid_;
};

class Kernel2 {
 public:
  using Fn = std::function<double(double, double)>;

  static Kernel2 analytic(Fn f);
  static Kernel2 on_grid(TimeGrid grid, SymmetricTable2 cells);

  bool is_analytic() const noexcept { return std::holds_alternative<Fn>(rep_); }
  double operator()(double s1, double s2) const;
  SymmetricTable2 cell_values(const TimeGrid& grid) const;
  std::optional<TimeGrid> grid() const { return grid_; }

 private:
  std::variant<Fn, SymmetricTable2> rep_;
  std::optional<TimeGrid> grid_;
};

class Kernel3 {
 public:
  using Fn = std::function<double(double, double, double)>;

  static Kernel3 analytic(Fn f);
  static Kernel3 on_grid(TimeGrid grid, SymmetricTable3 cells);

  bool is_analytic() const noexcept { return std::holds_alternative<Fn>(rep_); }
  double operator()(double s1, double s2, double s3) const;
  SymmetricTable3 cell_values(const TimeGrid& grid) const;
  std::optional<TimeGrid> grid() const { return grid_; }

 private:
  std::variant<Fn, SymmetricTable3> rep_;
  std::optional<TimeGrid> grid_;
};

/// Two-channel kernel K_ji(s1, s2); symmetric only when j == i, so it is
/// stored densely.
class CrossKernel {
 public:
  using Fn = std::function<double(double, double)>;

  static CrossKernel analytic(Fn f);
  static CrossKernel on_grid(TimeGrid grid, DenseTable2 cells);

  bool is_analytic() const noexcept { return std::holds_alternative<Fn>(rep_); }
  double operator()(double s1, double s2) const;
  DenseTable2 cell_values(const TimeGrid& grid) const;

 private:
  std::variant<Fn, DenseTable2> rep_;
  std::optional<TimeGrid> grid_;
};

struct SymmetryReport {
  bool pass = true;
  double max_deviation = 0.0;
};

/// Largest |K(sigma(s)) - K(s)| over argument permutations at sampled cell
/// midpoints of `grid`. Grid-form kernels are symmetric by storage.
SymmetryReport kernel_symmetry_check(const Kernel2& k, const TimeGrid& grid, double tol);
SymmetryReport kernel_symmetry_check(const Kernel3& k, const TimeGrid& grid, double tol);

}  // namespace volterra
