#include "volterra/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "volterra/errors.hpp"

namespace volterra {
namespace {

std::size_t cell_of(const TimeGrid& g, double s) {
  if (s < 0.0) throw ConfigError("kernel evaluated at negative lag");
  auto c = static_cast<std::size_t>(std::floor(s / g.h())) + 1;
  return std::min(c, g.n());
}

void require_compatible(const TimeGrid& own, const TimeGrid& wanted) {
  if (std::abs(own.h() - wanted.h()) > 1e-12 * own.h()) {
    throw ConfigError("grid kernel step " + std::to_string(own.h()) + " differs from requested step " +
                      std::to_string(wanted.h()));
  }
  if (own.n() < wanted.n()) {
    throw ConfigError("grid kernel covers " + std::to_string(own.n()) + " cells, " + std::to_string(wanted.n()) +
                      " requested");
  }
}

// Cells sampled by the symmetry check: all of them for small grids, an even
// subsample otherwise.
std::vector<std::size_t> sample_cells(std::size_t n, std::size_t cap) {
  std::vector<std::size_t> out;
  if (n <= cap) {
    for (std::size_t c = 1; c <= n; ++c) out.push_back(c);
  } else {
    for (std::size_t k = 0; k < cap; ++k) out.push_back(1 + k * (n - 1) / (cap - 1));
  }
  return out;
}

}  // namespace

Kernel1 Kernel1::analytic(Fn f) {
  Kernel1 k;
  k.rep_ = std::move(f);
  return k;
}

Kernel1 Kernel1::on_grid(TimeGrid grid, std::vector<double> cells) {
  if (cells.size() != grid.n()) throw ConfigError("Kernel1 cell count does not match grid");
  Kernel1 k;
  k.rep_ = std::move(cells);
  k.grid_ = grid;
  return k;
}

double Kernel1::operator()(double s) const {
  if (const auto* f = std::get_if<Fn>(&rep_)) return (*f)(s);
  return std::get<std::vector<double>>(rep_)[cell_of(*grid_, s) - 1];
}

std::vector<double> Kernel1::cell_values(const TimeGrid& grid) const {
  std::vector<double> out(grid.n());
  if (const auto* f = std::get_if<Fn>(&rep_)) {
    for (std::size_t c = 1; c <= grid.n(); ++c) out[c - 1] = (*f)(grid.midpoint(c));
    return out;
  }
  require_compatible(*grid_, grid);
  const auto& v = std::get<std::vector<double>>(rep_);
  std::copy_n(v.begin(), grid.n(), out.begin());
  return out;
}

Kernel2 Kernel2::analytic(Fn f) {
  Kernel2 k;
  k.rep_ = std::move(f);
  return k;
}

Kernel2 Kernel2::on_grid(TimeGrid grid, SymmetricTable2 cells) {
  if (cells.n() != grid.n()) throw ConfigError("Kernel2 cell count does not match grid");
  Kernel2 k;
  k.rep_ = std::move(cells);
  k.grid_ = grid;
  return k;
}

double Kernel2::operator()(double s1, double s2) const {
  if (const auto* f = std::get_if<Fn>(&rep_)) return (*f)(s1, s2);
  return std::get<SymmetricTable2>(rep_)(cell_of(*grid_, s1), cell_of(*grid_, s2));
}

SymmetricTable2 Kernel2::cell_values(const TimeGrid& grid) const {
  SymmetricTable2 out(grid.n());
  if (const auto* f = std::get_if<Fn>(&rep_)) {
    for (std::size_t a = 1; a <= grid.n(); ++a)
      for (std::size_t b = 1; b <= a; ++b) out(a, b) = (*f)(grid.midpoint(a), grid.midpoint(b));
    return out;
  }
  require_compatible(*grid_, grid);
  const auto& t = std::get<SymmetricTable2>(rep_);
  for (std::size_t a = 1; a <= grid.n(); ++a)
    for (std::size_t b = 1; b <= a; ++b) out(a, b) = t(a, b);
  return out;
}

Kernel3 Kernel3::analytic(Fn f) {
  Kernel3 k;
  k.rep_ = std::move(f);
  return k;
}

Kernel3 Kernel3::on_grid(TimeGrid grid, SymmetricTable3 cells) {
  if (cells.n() != grid.n()) throw ConfigError("Kernel3 cell count does not match grid");
  Kernel3 k;
  k.rep_ = std::move(cells);
  k.grid_ = grid;
  return k;
}

double Kernel3::operator()(double s1, double s2, double s3) const {
  if (const auto* f = std::get_if<Fn>(&rep_)) return (*f)(s1, s2, s3);
  return std::get<SymmetricTable3>(rep_)(cell_of(*grid_, s1), cell_of(*grid_, s2), cell_of(*grid_, s3));
}

SymmetricTable3 Kernel3::cell_values(const TimeGrid& grid) const {
  SymmetricTable3 out(grid.n());
  const auto* f = std::get_if<Fn>(&rep_);
  if (!f) require_compatible(*grid_, grid);
  for (std::size_t a = 1; a <= grid.n(); ++a)
    for (std::size_t b = 1; b <= a; ++b)
      for (std::size_t c = 1; c <= b; ++c)
        out(a, b, c) = f ? (*f)(grid.midpoint(a), grid.midpoint(b), grid.midpoint(c))
                         : std::get<SymmetricTable3>(rep_)(a, b, c);
  return out;
}

CrossKernel CrossKernel::analytic(Fn f) {
  CrossKernel k;
  k.rep_ = std::move(f);
  return k;
}

CrossKernel CrossKernel::on_grid(TimeGrid grid, DenseTable2 cells) {
  if (cells.n() != grid.n()) throw ConfigError("CrossKernel cell count does not match grid");
  CrossKernel k;
  k.rep_ = std::move(cells);
  k.grid_ = grid;
  return k;
}

double CrossKernel::operator()(double s1, double s2) const {
  if (const auto* f = std::get_if<Fn>(&rep_)) return (*f)(s1, s2);
  return std::get<DenseTable2>(rep_)(cell_of(*grid_, s1), cell_of(*grid_, s2));
}

DenseTable2 CrossKernel::cell_values(const TimeGrid& grid) const {
  DenseTable2 out(grid.n());
  const auto* f = std::get_if<Fn>(&rep_);
  if (!f) require_compatible(*grid_, grid);
  for (std::size_t a = 1; a <= grid.n(); ++a)
    for (std::size_t b = 1; b <= grid.n(); ++b)
      out(a, b) = f ? (*f)(grid.midpoint(a), grid.midpoint(b)) : std::get<DenseTable2>(rep_)(a, b);
  return out;
}

SymmetryReport kernel_symmetry_check(const Kernel2& k, const TimeGrid& grid, double tol) {
  SymmetryReport r;
  if (!k.is_analytic()) return r;
  const auto cells = sample_cells(grid.n(), 64);
  for (auto a : cells) {
    for (auto b : cells) {
      if (b >= a) continue;
      const double s1 = grid.midpoint(a), s2 = grid.midpoint(b);
      r.max_deviation = std::max(r.max_deviation, std::abs(k(s1, s2) - k(s2, s1)));
    }
  }
  r.pass = r.max_deviation <= tol;
  return r;
}

SymmetryReport kernel_symmetry_check(const Kernel3& k, const TimeGrid& grid, double tol) {
  SymmetryReport r;
  if (!k.is_analytic()) return r;
  const auto cells = sample_cells(grid.n(), 16);
  for (auto a : cells) {
    for (auto b : cells) {
      for (auto c : cells) {
        std::array<double, 3> s{grid.midpoint(a), grid.midpoint(b), grid.midpoint(c)};
        const double base = k(s[0], s[1], s[2]);
        std::sort(s.begin(), s.end());
        do {
          r.max_deviation = std::max(r.max_deviation, std::abs(k(s[0], s[1], s[2]) - base));
        } while (std::next_permutation(s.begin(), s.end()));
      }
    }
  }
  r.pass = r.max_deviation <= tol;
  return r;
}

}  // namespace volterra
