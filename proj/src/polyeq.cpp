#include "volterra/polyeq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>

#include "volterra/errors.hpp"
#include "volterra/lambert.hpp"

namespace volterra {

namespace {

std::string at_text(double t) { return std::to_string(t); }

double eval_or_zero(const std::function<double(double)>& f, double t) { return f ? f(t) : 0.0; }

}  // namespace

PolyEquation PolyEquation::quadratic_const(double lambda, AnalyticSignal y) {
  PolyEquation eq;
  eq.degree = 2;
  eq.k1 = [](double, double) { return 1.0; };
  eq.k2 = [lambda](double, double, double) { return lambda; };
  eq.y = std::move(y);
  return eq;
}

PolyEquation PolyEquation::quadratic_linear_kernel(double L1, double lambda, double F) {
  PolyEquation eq;
  eq.degree = 2;
  eq.k1 = [L1](double t, double s) { return 1.0 - L1 * (t - s); };
  eq.k2 = [lambda](double, double, double) { return -lambda; };
  eq.y = {[F](double t) { return F * t; }, [F](double) { return F; }};
  return eq;
}

void PolyEquation::validate() const {
  if (degree < 1 || degree > 3) throw ConfigError("polynomial equation degree must be 1, 2 or 3");
  if (!k1) throw ConfigError("polynomial equation needs K1");
  if (degree >= 2 && !k2) throw ConfigError("polynomial equation of degree >= 2 needs K2");
  if (degree >= 3 && !k3) throw ConfigError("polynomial equation of degree 3 needs K3");
  if (!y.value) throw ConfigError("polynomial equation needs a right-hand side");
  if (std::abs(y.value(0.0)) > 1e-12) throw ConfigError("right-hand side must satisfy y(0) = 0");
}

namespace {

SampledSignal invert_const_impl(double lambda, const SampledSignal& y, const SampledSignal& dy) {
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = 1.0 + 4.0 * lambda * y[i];
    if (!(d > 0.0)) {
      throw ExistenceError("no real continuous solution: 4 lambda y <= -1 at t = " + at_text(y.time(i)), y.time(i));
    }
    x[i] = dy[i] / std::sqrt(d);
  }
  return SampledSignal(y.grid(), Placement::nodes, std::move(x));
}

}  // namespace

SampledSignal invert_quadratic_const(double lambda, const AnalyticSignal& y, const TimeGrid& grid) {
  if (!y.value) throw ConfigError("invert_quadratic_const needs y");
  const auto yv = sample_nodes(grid, y.value);
  if (std::abs(yv[0]) > 1e-12) throw ConfigError("right-hand side must satisfy y(0) = 0");
  const auto dy = y.derivative ? sample_nodes(grid, y.derivative) : node_derivative(yv);
  return invert_const_impl(lambda, yv, dy);
}

SampledSignal invert_quadratic_const(double lambda, const SampledSignal& y) {
  require_placement(y, Placement::nodes, "invert_quadratic_const");
  if (std::abs(y[0]) > 1e-12) throw ConfigError("right-hand side must satisfy y(0) = 0");
  return invert_const_impl(lambda, y, node_derivative(y));
}

BlowupEstimate blowup_simple(double lambda, const std::function<double(double)>& F, double cap) {
  if (!F) throw ConfigError("blowup_simple needs F");
  if (!(cap > 0.0)) throw ConfigError("blow-up horizon cap must be positive");
  BlowupEstimate out;
  out.method = "T F(T) = 1/(4|lambda|), bisection";
  if (lambda == 0.0) {
    out.method = "lambda = 0: linear equation, no blow-up";
    return out;
  }
  const double target = 1.0 / (4.0 * std::abs(lambda));
  auto g = [&](double T) {
    const double f = F(T);
    if (!(f >= 0.0) || !std::isfinite(f)) throw NumericalError("F must be finite and nonnegative, F(" + at_text(T) + ") = " + std::to_string(f));
    return T * f - target;
  };
  double lo = 0.0, hi = std::min(1e-3, cap);
  while (g(hi) < 0.0) {
    lo = hi;
    if (hi >= cap) {
      out.method += ": no blow-up before cap";
      return out;
    }
    hi = std::min(2.0 * hi, cap);
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  out.found = true;
  out.t_star = 0.5 * (lo + hi);
  return out;
}

double linear_kernel_blowup(double L1, double lambda, double F) {
  if (!(L1 > 0.0) || !(lambda > 0.0) || !(F > 0.0)) throw ConfigError("linear-kernel equation needs L1, lambda, F > 0");
  const double c = L1 + 2.0 * lambda * F;
  return c / (L1 * L1) * std::log1p(L1 / (2.0 * lambda * F)) - 1.0 / L1;
}

LinearKernelSolution invert_quadratic_linear_kernel(double L1, double lambda, double F, double t) {
  const double t_star = linear_kernel_blowup(L1, lambda, F);
  if (t < 0.0) throw ConfigError("time must be nonnegative");
  if (t >= t_star) throw ExistenceError("continuous solution exists only for t < T* = " + at_text(t_star), t_star);
  const double c = L1 + 2.0 * lambda * F;
  const double r = 2.0 * lambda * F / c;
  const double z = -r * std::exp((L1 * L1 * t - 2.0 * lambda * F) / c);
  if (z <= lambert::branch_point) {
    throw ExistenceError("Lambert argument reached -1/e at t = " + at_text(t), t);
  }
  const double w = lambert::w(lambert::Branch::principal, z);
  LinearKernelSolution out;
  out.theta = -c / (2.0 * lambda * L1) * w - F / L1;
  out.x = -L1 / (2.0 * lambda) * w / (1.0 + w);
  return out;
}

SampledSignal NumericSolution::signal() const {
  return SampledSignal(grid, Placement::midpoints, x);
}

NumericSolution solve_numeric(const PolyEquation& eq, const TimeGrid& grid, Quadrature rule) {
  eq.validate();
  if (eq.degree > 2) throw ConfigError("the marching solver handles degree 1 and 2 equations");
  const std::size_t n = grid.n();
  const double h = grid.h();
  NumericSolution out{rule, grid, std::vector<double>(n), std::vector<double>(n, 0.0)};
  for (std::size_t j = 1; j <= n; ++j) out.t[j - 1] = rule == Quadrature::midpoint ? grid.midpoint(j) : grid.node(j);
  const auto& s = out.t;
  auto& u = out.x;

  const double dy0 = eq.y.derivative ? eq.y.derivative(0.0) : (eq.y.value(h) - eq.y.value(0.0)) / h;
  const double k0 = eq.k1(0.0, 0.0);
  if (k0 == 0.0) throw NumericalError("K1(0, 0) must be nonzero");
  double reference = dy0 / k0;

  for (std::size_t i = 1; i <= n; ++i) {
    const double ti = grid.node(i);
    const double si = s[i - 1];
    double c = eq.y.value(ti);
    double b = h * eq.k1(ti, si);
    double a = 0.0;
    for (std::size_t j = 1; j < i; ++j) c -= h * eq.k1(ti, s[j - 1]) * u[j - 1];
    if (eq.degree == 2) {
      const double h2 = h * h;
      a = h2 * eq.k2(ti, si, si);
      double cross = 0.0, past = 0.0;
      for (std::size_t j = 1; j < i; ++j) {
        const double uj = u[j - 1];
        cross += eq.k2(ti, si, s[j - 1]) * uj;
        double row = 0.5 * eq.k2(ti, s[j - 1], s[j - 1]) * uj;
        for (std::size_t k = 1; k < j; ++k) row += eq.k2(ti, s[j - 1], s[k - 1]) * u[k - 1];
        past += 2.0 * row * uj;
      }
      b += 2.0 * h2 * cross;
      c -= h2 * past;
    }

    double root;
    if (a == 0.0) {
      if (b == 0.0) throw ExistenceError("solvability lost: vanishing coefficient at t = " + at_text(ti), ti);
      root = c / b;
    } else {
      const double disc = b * b + 4.0 * a * c;
      if (disc < 0.0) {
        throw ExistenceError("solvability lost: negative discriminant at t = " + at_text(ti), ti);
      }
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      // a u^2 + b u - c = 0 has roots q / a and -c / q.
      const double r1 = q / a;
      const double r2 = q != 0.0 ? -c / q : r1;
      root = std::abs(r1 - reference) <= std::abs(r2 - reference) ? r1 : r2;
    }
    if (!std::isfinite(root)) throw ExistenceError("non-finite solution at t = " + at_text(ti), ti);
    u[i - 1] = root;
    reference = root;
  }
  return out;
}

MajorantSpec MajorantSpec::constant(int degree, double F, std::vector<double> L, std::vector<double> M) {
  MajorantSpec spec;
  spec.degree = degree;
  spec.F = [F](double) { return F; };
  for (double v : L) spec.L.push_back([v](double) { return v; });
  for (double v : M) spec.M.push_back([v](double) { return v; });
  return spec;
}

void MajorantSpec::validate() const {
  if (degree < 1 || degree > 3) throw ConfigError("majorant degree must be 1, 2 or 3");
  if (!F) throw ConfigError("majorant needs F");
  if (L.size() > static_cast<std::size_t>(degree)) throw ConfigError("majorant has more L_m than its degree");
  if (M.size() > static_cast<std::size_t>(degree - 1)) throw ConfigError("majorant has more M_m than its degree");
}

double MajorantSpec::numerator(double t, double theta) const {
  double v = F(t), p = 1.0;
  for (const auto& l : L) {
    p *= theta;
    v += eval_or_zero(l, t) * p;
  }
  return v;
}

double MajorantSpec::event(double t, double theta) const {
  double v = 0.0, p = theta;
  for (std::size_t k = 0; k < M.size(); ++k) {
    v += static_cast<double>(k + 2) * eval_or_zero(M[k], t) * p;
    p *= theta;
  }
  return v;
}

double MajorantResult::psi_at(double time) const {
  if (t.empty()) throw NumericalError("empty majorant trajectory");
  if (time <= t.front()) return psi.front();
  if (time >= t.back()) return psi.back();
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const std::size_t k = static_cast<std::size_t>(it - t.begin());
  if (!std::isfinite(psi[k])) return rate(time, theta[k - 1] + (time - t[k - 1]) * psi[k - 1]);
  const double dt = t[k] - t[k - 1];
  const double u = (time - t[k - 1]) / dt;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  const double th = h00 * theta[k - 1] + h10 * dt * psi[k - 1] + h01 * theta[k] + h11 * dt * psi[k];
  return rate(time, th);
}

namespace {

struct DpStep {
  double y5;
  double err;
  bool finite;
};

// One Dormand-Prince 5(4) step for the scalar ODE y' = f(x, y).
template <typename Fn>
DpStep dp_step(Fn&& f, double x, double y, double h) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  const double k1 = f(x, y);
  const double k2 = f(x + c2 * h, y + h * a21 * k1);
  const double k3 = f(x + c3 * h, y + h * (a31 * k1 + a32 * k2));
  const double k4 = f(x + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const double k5 = f(x + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const double k6 = f(x + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  const double y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const double k7 = f(x + h, y5);
  const double err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  const bool finite = std::isfinite(y5) && std::isfinite(err) && std::isfinite(k1) && std::isfinite(k2) &&
                      std::isfinite(k3) && std::isfinite(k4) && std::isfinite(k5) && std::isfinite(k6);
  return {y5, std::abs(err), finite};
}

constexpr double switch_denominator = 0.1;
constexpr std::size_t max_steps = 2000000;

}  // namespace

MajorantResult majorant_blowup(const MajorantSpec& spec, double horizon, double rtol) {
  spec.validate();
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("majorant horizon must be positive and finite");
  if (!(rtol > 0.0)) throw ConfigError("majorant tolerance must be positive");
  MajorantResult out;
  out.method = "Dormand-Prince in t";
  out.rate = [spec](double t, double theta) { return spec.numerator(t, theta) / (1.0 - spec.event(t, theta)); };

  // Phase 1: Theta(t).
  bool stage_bad = false;
  auto rhs_t = [&](double t, double theta) {
    const double den = 1.0 - spec.event(t, theta);
    if (!(den > 0.0)) {
      stage_bad = true;
      return 0.0;
    }
    return spec.numerator(t, theta) / den;
  };
  double t = 0.0, theta = 0.0;
  auto record = [&](double tt, double th, double ps) {
    out.t.push_back(tt);
    out.theta.push_back(th);
    out.psi.push_back(ps);
  };
  record(t, theta, rhs_t(0.0, 0.0));
  if (stage_bad) throw NumericalError("majorant denominator is not positive at t = 0");

  double h = horizon * 1e-4;
  const double atol = rtol * 1e-6;
  std::size_t steps = 0;
  bool switch_to_theta = false;
  while (t < horizon) {
    if (++steps > max_steps) throw NumericalError("majorant integration exceeded the step budget");
    h = std::min({h, horizon - t, horizon / 500.0});
    stage_bad = false;
    const auto st = dp_step(rhs_t, t, theta, h);
    const double tol = rtol * std::max(std::abs(theta), std::abs(st.y5)) + atol * (1.0 + horizon);
    if (stage_bad || !st.finite || st.err > tol) {
      h *= stage_bad || !st.finite ? 0.25 : std::max(0.2, 0.9 * std::pow(tol / st.err, 0.2));
      if (h < 1e-15 * (1.0 + t)) {
        // The denominator jumps to zero (piecewise coefficients).
        out.blowup = true;
        out.t_star = t;
        out.method += ", denominator jump";
        out.psi.back() = std::numeric_limits<double>::infinity();
        return out;
      }
      continue;
    }
    t += h;
    theta = st.y5;
    const double den = 1.0 - spec.event(t, theta);
    record(t, theta, spec.numerator(t, theta) / den);
    h *= st.err > 0.0 ? std::min(5.0, 0.9 * std::pow(tol / st.err, 0.2)) : 5.0;
    if (den < switch_denominator && spec.numerator(t, theta) > 0.0) {
      switch_to_theta = true;
      break;
    }
  }
  if (!switch_to_theta) {
    out.t_star = horizon;
    out.method += ", no blow-up before horizon";
    return out;
  }

  // Phase 2: t(Theta), dt/dTheta = den / num stays bounded at the event.
  out.method += ", then in Theta with event bisection";
  auto rhs_theta = [&](double th, double tt) {
    const double num = spec.numerator(tt, th);
    return (1.0 - spec.event(tt, th)) / num;
  };
  auto event_fn = [&](double th, double tt) { return spec.event(tt, th) - 1.0; };
  double dth = std::max(theta, 1e-300) * 1e-3;
  while (true) {
    if (++steps > max_steps) throw NumericalError("majorant integration exceeded the step budget");
    const auto st = dp_step(rhs_theta, theta, t, dth);
    const double tol = rtol * std::max(t, 1e-300) + atol * (1.0 + horizon);
    if (!st.finite || st.err > tol) {
      dth *= !st.finite ? 0.25 : std::max(0.2, 0.9 * std::pow(tol / st.err, 0.2));
      if (dth < 1e-16 * std::max(theta, 1e-300)) throw NumericalError("majorant step underflow near t = " + at_text(t));
      continue;
    }
    const double th_new = theta + dth;
    const double t_new = st.y5;
    const bool crossed = event_fn(th_new, t_new) >= 0.0;
    const bool past_horizon = t_new >= horizon;
    if (crossed || past_horizon) {
      // Bisection on the step length for the first of the two events.
      double lo = 0.0, hi = dth;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * th_new; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double tm = dp_step(rhs_theta, theta, t, mid).y5;
        const bool hit = (crossed && event_fn(theta + mid, tm) >= 0.0) || (past_horizon && tm >= horizon);
        (hit ? hi : lo) = mid;
      }
      const double th_e = theta + hi;
      const double t_e = dp_step(rhs_theta, theta, t, hi).y5;
      if (crossed && event_fn(th_e, t_e) >= 0.0 && t_e <= horizon) {
        out.blowup = true;
        out.t_star = t_e;
        record(t_e, th_e, std::numeric_limits<double>::infinity());
      } else {
        out.t_star = horizon;
        out.method += ", no blow-up before horizon";
        record(horizon, th_e, spec.numerator(horizon, th_e) / (1.0 - spec.event(horizon, th_e)));
      }
      return out;
    }
    theta = th_new;
    t = t_new;
    record(t, theta, spec.numerator(t, theta) / (1.0 - spec.event(t, theta)));
    dth *= st.err > 0.0 ? std::min(5.0, 0.9 * std::pow(tol / st.err, 0.2)) : 5.0;
  }
}

double stability_bound(const StabilityConstants& c, double T) {
  if (!(c.k > 0.0)) throw ConfigError("stability constant k must be positive");
  if (c.L1 < 0.0) throw ConfigError("stability constant L1 must be nonnegative");
  return std::exp(c.L1 * T / c.k) / c.k;
}

namespace {

double time_derivative(const std::function<double(double)>& f, double t, double d) {
  return (f(t + d) - f(t - d)) / (2.0 * d);
}

std::function<double(double)> step_function(std::vector<double> values, double h) {
  auto v = std::make_shared<const std::vector<double>>(std::move(values));
  return [v, h](double t) {
    const double r = std::ceil(t / h - 1e-9);
    const std::size_t i = r <= 0.0 ? 0 : std::min(v->size() - 1, static_cast<std::size_t>(r));
    return (*v)[i];
  };
}

void running_max(std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::max(v[i], v[i - 1]);
}

}  // namespace

StabilityConstants stability_constants(const PolyEquation::K1Fn& k1, const TimeGrid& grid) {
  if (!k1) throw ConfigError("stability constants need K1");
  const double d = 1e-5 * std::max(1.0, grid.horizon());
  StabilityConstants c{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t i = 0; i <= grid.n(); ++i) {
    const double xi = grid.node(i);
    c.k = std::min(c.k, std::abs(k1(xi, xi)));
    for (std::size_t j = 0; j <= i; ++j) {
      const double sj = grid.node(j);
      c.L1 = std::max(c.L1, std::abs(time_derivative([&](double t) { return k1(t, sj); }, xi, d)));
    }
  }
  return c;
}

MajorantSpec bounds_from_kernels(const PolyEquation& eq, const TimeGrid& grid) {
  eq.validate();
  const std::size_t n = grid.n();
  const double d = 1e-5 * std::max(1.0, grid.horizon());
  const auto yv = sample_nodes(grid, eq.y.value);
  const auto dy = eq.y.derivative ? sample_nodes(grid, eq.y.derivative) : node_derivative(yv);

  std::vector<double> F(n + 1), L1(n + 1, 0.0), L2(n + 1, 0.0), L3(n + 1, 0.0), M2(n + 1, 0.0), M3(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    const double xi = grid.node(i);
    const double diag = std::abs(eq.k1(xi, xi));
    if (!(diag > 0.0)) throw NumericalError("K1(t, t) vanishes at t = " + at_text(xi));
    F[i] = std::abs(dy[i]) / diag;
    for (std::size_t j = 0; j <= i; ++j) {
      const double sj = grid.node(j);
      L1[i] = std::max(L1[i], std::abs(time_derivative([&](double t) { return eq.k1(t, sj); }, xi, d)) / diag);
      if (eq.degree >= 2) {
        M2[i] = std::max(M2[i], std::abs(eq.k2(xi, xi, sj)) / diag);
        for (std::size_t k = 0; k <= j; ++k) {
          const double sk = grid.node(k);
          L2[i] = std::max(L2[i], std::abs(time_derivative([&](double t) { return eq.k2(t, sj, sk); }, xi, d)) / diag);
          if (eq.degree >= 3) {
            M3[i] = std::max(M3[i], std::abs(eq.k3(xi, xi, sj, sk)) / diag);
            for (std::size_t l = 0; l <= k; ++l) {
              const double sl = grid.node(l);
              L3[i] = std::max(L3[i],
                               std::abs(time_derivative([&](double t) { return eq.k3(t, sj, sk, sl); }, xi, d)) / diag);
            }
          }
        }
      }
    }
  }
  for (auto* v : {&F, &L1, &L2, &L3, &M2, &M3}) running_max(*v);

  MajorantSpec spec;
  spec.degree = eq.degree;
  const double h = grid.h();
  spec.F = step_function(std::move(F), h);
  spec.L.push_back(step_function(std::move(L1), h));
  if (eq.degree >= 2) {
    spec.L.push_back(step_function(std::move(L2), h));
    spec.M.push_back(step_function(std::move(M2), h));
  }
  if (eq.degree >= 3) {
    spec.L.push_back(step_function(std::move(L3), h));
    spec.M.push_back(step_function(std::move(M3), h));
  }
  return spec;
}

}  // namespace volterra
