#include "volterra/identification.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "volterra/errors.hpp"
#include "volterra/parallel.hpp"
#include "volterra/test_signals.hpp"

namespace volterra {

Lattice3::Lattice3(std::size_t n) : n_(n), offset_(n + 2, 0) {
  for (std::size_t i = 1; i <= n + 1; ++i) offset_[i] = offset_[i - 1] + (i - 1) * i / 2;
  v_.assign(offset_[n + 1], 0.0);
}

namespace {

Eigen::MatrixXd vandermonde_inverse(std::span<const double> amplitudes) {
  const auto m = static_cast<Eigen::Index>(amplitudes.size());
  if (m < 1) throw ConfigError("component extraction needs at least one amplitude");
  for (Eigen::Index k = 0; k < m; ++k) {
    if (amplitudes[k] == 0.0) throw ConfigError("test amplitudes must be nonzero");
    for (Eigen::Index j = 0; j < k; ++j) {
      if (amplitudes[j] == amplitudes[k]) throw ConfigError("Vandermonde system is singular: repeated amplitude");
    }
  }
  Eigen::MatrixXd v(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    double power = 1.0;
    for (Eigen::Index p = 0; p < m; ++p) {
      power *= amplitudes[k];
      v(k, p) = power;
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(v);
  if (!lu.isInvertible()) throw NumericalError("Vandermonde system is numerically singular");
  return lu.inverse();
}

template <typename Lattice>
std::vector<Lattice> split(const TimeGrid& grid, std::span<const double> amplitudes, const std::vector<Lattice>& y) {
  if (y.size() != amplitudes.size()) {
    throw ConfigError("response table holds " + std::to_string(y.size()) + " lattices for " +
                      std::to_string(amplitudes.size()) + " amplitudes");
  }
  for (const auto& l : y) {
    if (l.n() != grid.n()) throw ConfigError("response lattice does not match the grid");
  }
  const Eigen::MatrixXd inv = vandermonde_inverse(amplitudes);
  const std::size_t m = amplitudes.size();
  std::vector<Lattice> f(m, Lattice(grid.n()));
  const std::size_t size = y[0].raw().size();
  for (std::size_t s = 0; s < size; ++s) {
    for (std::size_t p = 0; p < m; ++p) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) acc += inv(p, k) * y[k].raw()[s];
      f[p].raw()[s] = acc;
    }
  }
  return f;
}

void require_nodes(const SampledSignal& y, const TimeGrid& grid) {
  if (y.placement() != Placement::nodes || y.size() != grid.n() + 1) {
    throw ConfigError("system under identification must return node-placed responses on the test grid");
  }
}

Lattice2 window_slice(const Lattice3& t) {
  Lattice2 out(t.n());
  for (std::size_t i = 1; i <= t.n(); ++i)
    for (std::size_t l = 1; l <= i; ++l) out(i, l) = t.at(i, l, 0);
  return out;
}

void require_zero_sum(std::span<const double> amplitudes) {
  double sum = 0.0, scale = 0.0;
  for (double a : amplitudes) {
    sum += a;
    scale = std::max(scale, std::abs(a));
  }
  if (std::abs(sum) > 1e-12 * scale) {
    throw ConfigError("grid-kernel identification needs test amplitudes summing to zero (sum = " +
                      std::to_string(sum) + "); use product-integration identification otherwise");
  }
}

}  // namespace

std::vector<double> extract_point(std::span<const double> amplitudes, std::span<const double> responses) {
  if (responses.size() != amplitudes.size()) throw ConfigError("one response per amplitude is required");
  const Eigen::MatrixXd inv = vandermonde_inverse(amplitudes);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(responses.data(), static_cast<Eigen::Index>(responses.size()));
  const Eigen::VectorXd f = inv * y;
  return std::vector<double>(f.data(), f.data() + f.size());
}

ResponseTable2 collect_responses2(const ScalarSystem& system, const TimeGrid& grid, std::vector<double> amplitudes) {
  const std::size_t n = grid.n();
  ResponseTable2 t{grid, std::move(amplitudes), {}};
  t.y.assign(t.amplitudes.size(), Lattice2(n));
  parallel_for(1, n + 1, [&](std::size_t l) {
    const std::size_t widths[] = {l};
    for (std::size_t k = 0; k < t.amplitudes.size(); ++k) {
      const auto y = system(family_signal(t.amplitudes[k], widths, grid));
      require_nodes(y, grid);
      for (std::size_t i = l; i <= n; ++i) t.y[k](i, l) = y[i];
    }
  });
  return t;
}

ResponseTable3 collect_responses3(const ScalarSystem& system, const TimeGrid& grid, std::vector<double> amplitudes) {
  const std::size_t n = grid.n();
  ResponseTable3 t{grid, std::move(amplitudes), {}};
  t.y.assign(t.amplitudes.size(), Lattice3(n));
  parallel_for(1, n + 1, [&](std::size_t l1) {
    for (std::size_t l2 = 0; l1 + l2 <= n; ++l2) {
      const std::size_t widths[] = {l1, l2};
      for (std::size_t k = 0; k < t.amplitudes.size(); ++k) {
        const auto y = system(family_signal(t.amplitudes[k], widths, grid));
        require_nodes(y, grid);
        for (std::size_t i = l1 + l2; i <= n; ++i) t.y[k](i, l1, l2) = y[i];
      }
    }
  });
  return t;
}

std::vector<Lattice2> extract_components(const ResponseTable2& table) {
  return split(table.grid, table.amplitudes, table.y);
}

std::vector<Lattice3> extract_components(const ResponseTable3& table) {
  return split(table.grid, table.amplitudes, table.y);
}

Kernel1 invert_k1(const SampledSignal& step_response, double alpha) {
  if (alpha == 0.0) throw ConfigError("invert_k1: step amplitude must be nonzero");
  require_placement(step_response, Placement::nodes, "invert_k1");
  const auto& g = step_response.grid();
  std::vector<double> k(g.n());
  for (std::size_t j = 1; j <= g.n(); ++j) k[j - 1] = (step_response[j] - step_response[j - 1]) / (alpha * g.h());
  return Kernel1::on_grid(g, std::move(k));
}

std::vector<double> linear_weights(const Lattice2& f1) {
  std::vector<double> m(f1.n());
  for (std::size_t j = 1; j <= f1.n(); ++j) m[j - 1] = f1.at(j, j) - f1.at(j - 1, j - 1);
  return m;
}

SymmetricTable2 quadratic_weights(const Lattice2& f2) {
  const std::size_t n = f2.n();
  SymmetricTable2 g(n);
  // f2(i, l) is the sum of l_ab over the window of lag cells i-l+1..i.
  for (std::size_t b = 1; b <= n; ++b) {
    g(b, b) = f2.at(b, 1);
    for (std::size_t a = 1; a < b; ++a) {
      const std::size_t len = b - a + 1;
      g(b, a) = 0.5 * (f2.at(b, len) - f2.at(b, len - 1) - f2.at(b - 1, len - 1) + f2.at(b - 1, len - 2));
    }
  }
  return g;
}

SymmetricTable3 cubic_weights(const Lattice3& f3) {
  const std::size_t n = f3.n();
  SymmetricTable3 g(n);

  // Signed triple-window sum with +1 on lag cells (p1, p0] and -1 on (p2, p1].
  auto F = [&](std::size_t p0, std::size_t p1, std::size_t p2) -> double {
    if (p0 == 0 || p0 == p2) return 0.0;
    if (p0 == p1) return -f3.at(p0, p0 - p2, 0);
    return f3.at(p0, p0 - p1, p1 - p2);
  };

  parallel_for(1, n + 1, [&](std::size_t q) {
    // D(p1, p2) = F(q, p1, p2) - F(q-1, p1, p2) for 0 <= p2 <= p1 <= q-1.
    std::vector<double> dtab(q * q, 0.0);
    auto D = [&](std::size_t p1, std::size_t p2) -> double& { return dtab[p1 * q + p2]; };
    for (std::size_t p1 = 0; p1 < q; ++p1)
      for (std::size_t p2 = 0; p2 <= p1; ++p2) D(p1, p2) = F(q, p1, p2) - F(q - 1, p1, p2);

    const double top = D(q - 1, q - 1);
    g(q, q, q) = top;

    std::vector<double> sum_v(q), box(q);
    for (std::size_t p = 0; p < q; ++p) {
      const double plus = D(p, p);
      const double minus = D(q - 1, p);
      sum_v[p] = (plus - minus) / 6.0;
      box[p] = ((plus + minus) / 2.0 - top) / 3.0;
    }
    for (std::size_t b = 1; b < q; ++b) g(q, q, b) = sum_v[b - 1] - sum_v[b];

    for (std::size_t b = 2; b < q; ++b)
      for (std::size_t c = 1; c < b; ++c)
        g(q, b, c) = -(D(b, c) - D(b - 1, c) - D(b, c - 1) + D(b - 1, c - 1)) / 12.0;

    for (std::size_t b = q - 1; b >= 1; --b) {
      double off = 0.0;
      for (std::size_t c = b + 1; c < q; ++c) off += g(q, c, b);
      g(q, b, b) = box[b - 1] - box[b] - 2.0 * off;
    }
  });
  return g;
}

Kernel2 invert_k2(const Lattice2& f2, const TimeGrid& grid) {
  if (f2.n() != grid.n()) throw ConfigError("invert_k2: lattice does not match the grid");
  if (grid.n() < 3) throw ConfigError("invert_k2: lattice too small for the difference stencil (n < 3)");
  auto g = quadratic_weights(f2);
  const double h2 = grid.h() * grid.h();
  SymmetricTable2 k(grid.n());
  for (std::size_t a = 1; a <= grid.n(); ++a)
    for (std::size_t b = 1; b <= a; ++b) k(a, b) = g(a, b) / h2;
  return Kernel2::on_grid(grid, std::move(k));
}

Kernel3 invert_k3(const Lattice3& f3, const TimeGrid& grid) {
  if (f3.n() != grid.n()) throw ConfigError("invert_k3: lattice does not match the grid");
  if (grid.n() < 4) throw ConfigError("invert_k3: lattice too small for the difference stencil (n < 4)");
  auto g = cubic_weights(f3);
  const double h3 = grid.h() * grid.h() * grid.h();
  SymmetricTable3 k(grid.n());
  for (std::size_t a = 1; a <= grid.n(); ++a)
    for (std::size_t b = 1; b <= a; ++b)
      for (std::size_t c = 1; c <= b; ++c) k(a, b, c) = g(a, b, c) / h3;
  return Kernel3::on_grid(grid, std::move(k));
}

double k2_from_derivatives(const std::function<double(double, double)>& f, double t, double w, double d) {
  const double ftw = (f(t + d, w + d) - f(t + d, w - d) - f(t - d, w + d) + f(t - d, w - d)) / (4 * d * d);
  const double fww = (f(t, w + d) - 2 * f(t, w) + f(t, w - d)) / (d * d);
  return (ftw + fww) / 2;
}

double k3_from_derivatives(const std::function<double(double, double, double)>& f, double t, double w1, double w2,
                           double d) {
  auto d2w2 = [&](double tt, double ww1) {
    return (f(tt, ww1, w2 + d) - 2 * f(tt, ww1, w2) + f(tt, ww1, w2 - d)) / (d * d);
  };
  auto d2w1 = [&](double ww2) { return (f(t, w1 + d, ww2) - 2 * f(t, w1, ww2) + f(t, w1 - d, ww2)) / (d * d); };
  const double f_tw2w2 = (d2w2(t + d, w1) - d2w2(t - d, w1)) / (2 * d);
  double f_tw1w2 = 0.0;
  for (int st : {-1, 1})
    for (int s1 : {-1, 1})
      for (int s2 : {-1, 1}) f_tw1w2 += st * s1 * s2 * f(t + st * d, w1 + s1 * d, w2 + s2 * d);
  f_tw1w2 /= 8 * d * d * d;
  const double f_w1w2w2 = (d2w2(t, w1 + d) - d2w2(t, w1 - d)) / (2 * d);
  const double f_w1w1w2 = (d2w1(w2 + d) - d2w1(w2 - d)) / (2 * d);
  return (f_tw2w2 - f_tw1w2 + f_w1w2w2 - f_w1w1w2) / 12;
}

double k3_compact(const std::function<double(double, double, double)>& f, double s1, double s2, double s3, double d) {
  double acc = 0.0;
  for (int a : {-1, 1})
    for (int b : {-1, 1})
      for (int c : {-1, 1}) {
        const double u1 = s1 + a * d, u2 = s2 + b * d, u3 = s3 + c * d;
        acc += a * b * c * f(u1, u1 - u2, u2 - u3);
      }
  return -acc / (8 * d * d * d) / 12;
}

PiWeights identify_pi_quadratic(const ResponseTable2& table) {
  if (table.amplitudes.size() != 2) throw ConfigError("quadratic identification needs exactly two amplitudes");
  const auto f = extract_components(table);
  PiWeights w(table.grid);
  w.m = linear_weights(f[0]);
  w.l = quadratic_weights(f[1]);
  return w;
}

PiWeights identify_pi_cubic(const ResponseTable3& table) {
  if (table.amplitudes.size() != 3) throw ConfigError("cubic identification needs exactly three amplitudes");
  const auto f = extract_components(table);
  PiWeights w(table.grid, true);
  w.m = linear_weights(window_slice(f[0]));
  w.l = quadratic_weights(window_slice(f[1]));
  w.c = cubic_weights(f[2]);
  return w;
}

VolterraModel kernels_from_weights(const PiWeights& w, int degree) {
  const auto& g = w.grid;
  const double h = g.h();
  const std::size_t n = g.n();
  std::vector<double> k1(n);
  for (std::size_t j = 0; j < n; ++j) k1[j] = w.m[j] / h;
  SymmetricTable2 k2(n);
  for (std::size_t a = 1; a <= n; ++a)
    for (std::size_t b = 1; b <= a; ++b) k2(a, b) = w.l(a, b) / (h * h);
  if (degree == 1) return VolterraModel::linear(Kernel1::on_grid(g, std::move(k1)));
  if (degree == 2) return VolterraModel::quadratic(Kernel1::on_grid(g, std::move(k1)), Kernel2::on_grid(g, std::move(k2)));
  if (degree != 3 || !w.c) throw ConfigError("kernels_from_weights: cubic model needs c_jkl weights");
  SymmetricTable3 k3(n);
  const double h3 = h * h * h;
  for (std::size_t a = 1; a <= n; ++a)
    for (std::size_t b = 1; b <= a; ++b)
      for (std::size_t c = 1; c <= b; ++c) k3(a, b, c) = (*w.c)(a, b, c) / h3;
  return VolterraModel::cubic(Kernel1::on_grid(g, std::move(k1)), Kernel2::on_grid(g, std::move(k2)),
                              Kernel3::on_grid(g, std::move(k3)));
}

VolterraModel identify_quadratic(const ResponseTable2& table) {
  require_zero_sum(table.amplitudes);
  if (table.grid.n() < 3) throw ConfigError("quadratic identification needs n >= 3");
  return kernels_from_weights(identify_pi_quadratic(table), 2);
}

VolterraModel identify_cubic(const ResponseTable3& table) {
  require_zero_sum(table.amplitudes);
  if (table.grid.n() < 4) throw ConfigError("cubic identification needs n >= 4");
  return kernels_from_weights(identify_pi_cubic(table), 3);
}

VectorQuadraticModel identify_vector_quadratic(const VectorSystem& system, const TimeGrid& grid, std::size_t p,
                                               const std::vector<std::vector<double>>& channel_amplitudes) {
  if (p < 2) throw ConfigError("vector identification needs p >= 2 channels");
  if (channel_amplitudes.size() != p) throw ConfigError("one amplitude pair per channel is required");
  const std::size_t n = grid.n();
  const auto zero = SampledSignal::zeros(grid, Placement::midpoints);

  auto run = [&](std::size_t ch_a, const SampledSignal* xa, std::size_t ch_b, const SampledSignal* xb) {
    std::vector<SampledSignal> xs(p, zero);
    if (xa) xs[ch_a] = *xa;
    if (xb) xs[ch_b] = *xb;
    auto y = system(xs);
    require_nodes(y, grid);
    return y;
  };

  VectorQuadraticModel model;
  model.p = p;
  for (std::size_t c = 0; c < p; ++c) {
    ScalarSystem single = [&, c](const SampledSignal& x) { return run(c, &x, c, nullptr); };
    const auto w = identify_pi_quadratic(collect_responses2(single, grid, channel_amplitudes[c]));
    auto m = kernels_from_weights(w, 2);
    model.linear.push_back(*m.k1);
    model.quadratic.push_back(*m.k2);
  }

  auto delayed_step = [&](double alpha, std::size_t delay) {
    std::vector<double> v(n, 0.0);
    for (std::size_t c = delay; c < n; ++c) v[c] = alpha;
    return SampledSignal(grid, Placement::midpoints, std::move(v));
  };

  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = j + 1; i < p; ++i) {
      const double aj = channel_amplitudes[j].at(0);
      const double ai = channel_amplitudes[i].at(0);
      // P(a, b): response weight summed over lag cells 1..a of x_j and 1..b of x_i.
      std::vector<double> P((n + 1) * (n + 1), 0.0);
      auto at = [&](std::size_t a, std::size_t b) -> double& { return P[a * (n + 1) + b]; };
      parallel_for(0, n, [&](std::size_t d) {
        const auto xj = delayed_step(aj, 0), xi_d = delayed_step(ai, d);
        const auto both = run(j, &xj, i, &xi_d);
        const auto only_j = run(j, &xj, i, nullptr);
        const auto only_i = run(i, &xi_d, j, nullptr);
        for (std::size_t a = d + 1; a <= n; ++a) at(a, a - d) = (both[a] - only_j[a] - only_i[a]) / (aj * ai);
        if (d == 0) return;
        const auto xi = delayed_step(ai, 0), xj_d = delayed_step(aj, d);
        const auto both_r = run(j, &xj_d, i, &xi);
        const auto only_jr = run(j, &xj_d, i, nullptr);
        const auto only_ir = run(i, &xi, j, nullptr);
        for (std::size_t a = d + 1; a <= n; ++a) at(a - d, a) = (both_r[a] - only_jr[a] - only_ir[a]) / (aj * ai);
      });
      DenseTable2 k(n);
      const double h2 = grid.h() * grid.h();
      for (std::size_t a = 1; a <= n; ++a)
        for (std::size_t b = 1; b <= n; ++b) k(a, b) = (at(a, b) - at(a - 1, b) - at(a, b - 1) + at(a - 1, b - 1)) / h2;
      model.cross.emplace(std::pair{j, i}, CrossKernel::on_grid(grid, std::move(k)));
    }
  }
  model.validate();
  return model;
}

}  // namespace volterra
