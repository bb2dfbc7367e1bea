#include "volterra/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "volterra/errors.hpp"
#include "volterra/parallel.hpp"

namespace volterra {

PiWeights::PiWeights(TimeGrid g, bool cubic) : grid(g), m(g.n(), 0.0), l(g.n()) {
  if (cubic) c.emplace(g.n());
}

PiWeights constant_kernel_weights(const TimeGrid& grid, double k1, double k2, std::optional<double> k3) {
  PiWeights w(grid, k3.has_value());
  const double h = grid.h();
  const std::size_t n = grid.n();
  std::fill(w.m.begin(), w.m.end(), k1 * h);
  for (std::size_t a = 1; a <= n; ++a)
    for (std::size_t b = 1; b <= a; ++b) w.l(a, b) = k2 * h * h;
  if (k3) {
    for (std::size_t a = 1; a <= n; ++a)
      for (std::size_t b = 1; b <= a; ++b)
        for (std::size_t c = 1; c <= b; ++c) (*w.c)(a, b, c) = *k3 * h * h * h;
  }
  return w;
}

VolterraModel VolterraModel::linear(Kernel1 k1) {
  VolterraModel m;
  m.degree = 1;
  m.k1 = std::move(k1);
  return m;
}

VolterraModel VolterraModel::quadratic(Kernel1 k1, Kernel2 k2) {
  VolterraModel m;
  m.degree = 2;
  m.k1 = std::move(k1);
  m.k2 = std::move(k2);
  return m;
}

VolterraModel VolterraModel::cubic(Kernel1 k1, Kernel2 k2, Kernel3 k3) {
  VolterraModel m;
  m.degree = 3;
  m.k1 = std::move(k1);
  m.k2 = std::move(k2);
  m.k3 = std::move(k3);
  return m;
}

VolterraModel VolterraModel::product_integration(PiWeights w, int degree) {
  VolterraModel m;
  m.degree = degree;
  m.mode = Discretization::product_integration;
  m.weights = std::move(w);
  m.validate();
  return m;
}

void VolterraModel::validate() const {
  if (degree < 1 || degree > 3) throw ConfigError("model degree must be 1, 2 or 3");
  if (mode == Discretization::product_integration) {
    if (!weights) throw ConfigError("product-integration mode needs weights");
    if (degree == 3 && !weights->c) throw ConfigError("cubic product-integration model needs c_jkl weights");
    return;
  }
  if (!k1) throw ConfigError("model is missing K1");
  if (degree >= 2 && !k2) throw ConfigError("model of degree >= 2 is missing K2");
  if (degree >= 3 && !k3) throw ConfigError("cubic model is missing K3");
}

PiWeights quadrature_weights(const VolterraModel& model, const TimeGrid& grid) {
  model.validate();
  if (model.mode == Discretization::product_integration) {
    const auto& w = *model.weights;
    if (w.grid.h() != grid.h() || w.grid.n() < grid.n()) {
      throw ConfigError("product-integration weights do not cover the simulation grid");
    }
    if (w.grid.n() == grid.n()) return w;
    PiWeights cut(grid, w.c.has_value());
    for (std::size_t a = 1; a <= grid.n(); ++a) {
      cut.m[a - 1] = w.m[a - 1];
      for (std::size_t b = 1; b <= a; ++b) {
        cut.l(a, b) = w.l(a, b);
        if (w.c)
          for (std::size_t c = 1; c <= b; ++c) (*cut.c)(a, b, c) = (*w.c)(a, b, c);
      }
    }
    return cut;
  }

  const double h = grid.h();
  PiWeights w(grid, model.degree >= 3);
  const auto k1 = model.k1->cell_values(grid);
  for (std::size_t j = 0; j < grid.n(); ++j) w.m[j] = k1[j] * h;
  if (model.degree >= 2) {
    const auto k2 = model.k2->cell_values(grid);
    for (std::size_t a = 1; a <= grid.n(); ++a)
      for (std::size_t b = 1; b <= a; ++b) w.l(a, b) = k2(a, b) * h * h;
  }
  if (model.degree >= 3) {
    const auto k3 = model.k3->cell_values(grid);
    const double h3 = h * h * h;
    for (std::size_t a = 1; a <= grid.n(); ++a)
      for (std::size_t b = 1; b <= a; ++b)
        for (std::size_t c = 1; c <= b; ++c) (*w.c)(a, b, c) = k3(a, b, c) * h3;
  }
  return w;
}

namespace {

// Lag cell j at node i multiplies the input sample of cell i - j + 1,
// stored at index i - j.
double linear_term_at(const std::vector<double>& m, std::span<const double> x, std::size_t i) {
  double s = 0.0;
  for (std::size_t j = 1; j <= i; ++j) s += m[j - 1] * x[i - j];
  return s;
}

double quadratic_term_at(const SymmetricTable2& l, std::span<const double> x, std::size_t i) {
  double s = 0.0;
  for (std::size_t a = 1; a <= i; ++a) {
    const double xa = x[i - a];
    if (xa == 0.0) continue;
    double inner = 0.0;
    for (std::size_t b = 1; b < a; ++b) inner += l(a, b) * x[i - b];
    s += xa * (2.0 * inner + l(a, a) * xa);
  }
  return s;
}

}  // namespace

double cubic_term_at(const SymmetricTable3& c, std::span<const double> x, std::size_t i) {
  double s = 0.0;
  for (std::size_t a = 1; a <= i; ++a) {
    const double xa = x[i - a];
    if (xa == 0.0) continue;
    double sa = 0.0;
    for (std::size_t b = 1; b <= a; ++b) {
      const double xb = x[i - b];
      if (xb == 0.0) continue;
      // Multiplicity of the sorted triple (a >= b >= c) among all orderings.
      double sb = 0.0;
      for (std::size_t k = 1; k < b; ++k) sb += c(a, b, k) * x[i - k];
      const double diag = c(a, b, b) * xb;
      sa += xb * (a == b ? 3.0 * sb + diag : 6.0 * sb + 3.0 * diag);
    }
    s += xa * sa;
  }
  return s;
}

double cubic_term_naive(const SymmetricTable3& c, std::span<const double> x, std::size_t i) {
  double s = 0.0;
  for (std::size_t a = 1; a <= i; ++a)
    for (std::size_t b = 1; b <= i; ++b)
      for (std::size_t k = 1; k <= i; ++k) s += c(a, b, k) * x[i - a] * x[i - b] * x[i - k];
  return s;
}

std::array<SampledSignal, 3> simulate_terms(const VolterraModel& model, const SampledSignal& x) {
  require_placement(x, Placement::midpoints, "simulate input");
  const auto& g = x.grid();
  const PiWeights w = quadrature_weights(model, g);
  const std::size_t n = g.n();
  const auto xs = x.values();

  std::vector<double> y1(n + 1, 0.0), y2(n + 1, 0.0), y3(n + 1, 0.0);
  parallel_for(1, n + 1, [&](std::size_t i) {
    y1[i] = linear_term_at(w.m, xs, i);
    if (model.degree >= 2) y2[i] = quadratic_term_at(w.l, xs, i);
    if (model.degree >= 3) y3[i] = cubic_term_at(*w.c, xs, i);
  });
  return {SampledSignal(g, Placement::nodes, std::move(y1)), SampledSignal(g, Placement::nodes, std::move(y2)),
          SampledSignal(g, Placement::nodes, std::move(y3))};
}

SampledSignal simulate(const VolterraModel& model, const SampledSignal& x) {
  const auto terms = simulate_terms(model, x);
  std::vector<double> y(x.grid().n() + 1);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = terms[0][i] + terms[1][i] + terms[2][i];
  return SampledSignal(x.grid(), Placement::nodes, std::move(y));
}

void VectorQuadraticModel::validate() const {
  if (p < 2) throw ConfigError("vector model needs at least two channels");
  if (linear.size() != p || quadratic.size() != p) {
    throw ConfigError("vector model needs one K_i and one K_ii per channel (p = " + std::to_string(p) + ")");
  }
  for (const auto& [key, k] : cross) {
    if (!(key.first < key.second) || key.second >= p) {
      throw ConfigError("cross kernel index (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                        ") must satisfy j < i < p");
    }
  }
}

VectorWeights vector_weights(const VectorQuadraticModel& model, const TimeGrid& grid) {
  model.validate();
  const double h = grid.h();
  const std::size_t n = grid.n();
  VectorWeights w{grid, {}, {}, {}};
  for (std::size_t ch = 0; ch < model.p; ++ch) {
    auto k1 = model.linear[ch].cell_values(grid);
    for (double& v : k1) v *= h;
    w.linear.push_back(std::move(k1));
    auto k2 = model.quadratic[ch].cell_values(grid);
    SymmetricTable2 l(n);
    for (std::size_t a = 1; a <= n; ++a)
      for (std::size_t b = 1; b <= a; ++b) l(a, b) = k2(a, b) * h * h;
    w.quadratic.push_back(std::move(l));
  }
  for (const auto& [key, k] : model.cross) {
    auto cells = k.cell_values(grid);
    DenseTable2 d(n);
    for (std::size_t a = 1; a <= n; ++a)
      for (std::size_t b = 1; b <= n; ++b) d(a, b) = cells(a, b) * h * h;
    w.cross.emplace(key, std::move(d));
  }
  return w;
}

double vector_output_at(const VectorWeights& w, std::span<const std::span<const double>> x, std::size_t i) {
  double s = 0.0;
  for (std::size_t ch = 0; ch < w.linear.size(); ++ch) {
    s += linear_term_at(w.linear[ch], x[ch], i);
    s += quadratic_term_at(w.quadratic[ch], x[ch], i);
  }
  for (const auto& [key, d] : w.cross) {
    const auto xj = x[key.first];
    const auto xi = x[key.second];
    double c = 0.0;
    for (std::size_t a = 1; a <= i; ++a) {
      const double va = xj[i - a];
      if (va == 0.0) continue;
      double inner = 0.0;
      for (std::size_t b = 1; b <= i; ++b) inner += d(a, b) * xi[i - b];
      c += va * inner;
    }
    s += c;
  }
  return s;
}

SampledSignal simulate_vector(const VectorWeights& w, std::span<const SampledSignal> x) {
  if (x.size() != w.linear.size()) {
    throw ConfigError("simulate_vector: expected " + std::to_string(w.linear.size()) + " channels, got " +
                      std::to_string(x.size()));
  }
  std::vector<std::span<const double>> xs;
  for (const auto& s : x) {
    require_placement(s, Placement::midpoints, "simulate_vector input");
    if (!(s.grid() == x[0].grid())) throw ConfigError("simulate_vector: channels must share one grid");
    xs.push_back(s.values());
  }
  const auto& g = x[0].grid();
  if (g.h() != w.grid.h() || g.n() > w.grid.n()) throw ConfigError("simulate_vector: weights do not cover the grid");
  std::vector<double> y(g.n() + 1, 0.0);
  parallel_for(1, g.n() + 1, [&](std::size_t i) { y[i] = vector_output_at(w, xs, i); });
  return SampledSignal(g, Placement::nodes, std::move(y));
}

SampledSignal simulate_vector(const VectorQuadraticModel& model, std::span<const SampledSignal> x) {
  if (x.empty()) throw ConfigError("simulate_vector: no input channels");
  return simulate_vector(vector_weights(model, x[0].grid()), x);
}

std::vector<ConvergenceRow> convergence_probe(const VolterraModel& model, const std::function<double(double)>& x,
                                              double horizon, std::span<const double> steps) {
  if (steps.empty()) throw ConfigError("convergence_probe needs at least one step");
  if (model.mode != Discretization::midpoint) throw ConfigError("convergence_probe needs an analytic midpoint model");
  const double finest = *std::min_element(steps.begin(), steps.end());
  const double href = finest / 4.0;
  const auto nref = static_cast<std::size_t>(std::llround(horizon / href));
  const TimeGrid gref(href, nref);
  const auto yref = simulate(model, sample_midpoints(gref, x));

  std::vector<ConvergenceRow> rows;
  for (double h : steps) {
    const auto ratio = static_cast<std::size_t>(std::llround(h / href));
    if (ratio == 0 || std::abs(ratio * href - h) > 1e-9 * h) {
      throw ConfigError("convergence_probe step " + std::to_string(h) + " is not a multiple of the reference step");
    }
    const TimeGrid g(h, nref / ratio);
    const auto y = simulate(model, sample_midpoints(g, x));
    double err = 0.0;
    for (std::size_t i = 0; i <= g.n(); ++i) err = std::max(err, std::abs(y[i] - yref[i * ratio]));
    ConvergenceRow row{h, err, 0.0};
    if (!rows.empty() && err > 0.0 && rows.back().error > 0.0) {
      row.order = std::log(rows.back().error / err) / std::log(rows.back().h / h);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace volterra
