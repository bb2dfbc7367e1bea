#include "volterra/suite.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>

#include "volterra/amplitude_opt.hpp"
#include "volterra/control.hpp"
#include "volterra/errors.hpp"
#include "volterra/identification.hpp"
#include "volterra/lambert.hpp"
#include "volterra/polyeq.hpp"
#include "volterra/reference_models.hpp"
#include "volterra/simulation.hpp"

namespace volterra {

namespace {

using lambert::Branch;

class Builder {
 public:
  explicit Builder(CriterionResult& r) : r_(r) {}

  void abs(const std::string& name, double value, double target, double tol) {
    add({name, value, target, tol, "abs", std::abs(value - target) <= tol});
  }
  void rel(const std::string& name, double value, double target, double tol) {
    add({name, value, target, tol, "rel", std::abs(value - target) <= tol * std::abs(target)});
  }
  void le(const std::string& name, double value, double bound) { add({name, value, bound, 0.0, "<=", value <= bound}); }
  void ge(const std::string& name, double value, double bound) { add({name, value, bound, 0.0, ">=", value >= bound}); }
  void truth(const std::string& name, bool ok) { add({name, ok ? 1.0 : 0.0, 1.0, 0.0, "==", ok}); }
  void info(const std::string& name, double value) { add({name, value, 0.0, 0.0, "info", true}); }

 private:
  void add(Check c) {
    if (!std::isfinite(c.value) && c.relation != "info") c.pass = false;
    r_.pass = r_.pass && c.pass;
    r_.checks.push_back(std::move(c));
  }
  CriterionResult& r_;
};

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

template <typename F>
double integrate(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-14);
}

// 1. Lambert identity and branch point.
void lambert_identity(Builder& b, const SuiteOptions& opt) {
  const double lo = lambert::branch_point;
  double worst0 = 0.0, worst1 = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double s = static_cast<double>(k) / 1000.0;
    const double y0 = lo + std::expm1(14.0 * s);
    const double z0 = lambert::w(Branch::principal, y0);
    worst0 = std::max(worst0, std::abs(z0 * std::exp(z0) - y0) / std::max(1.0, std::abs(y0)));
    const double y1 = lo * (1.0 - s * s);
    const double z1 = lambert::w(Branch::minus_one, y1);
    worst1 = std::max(worst1, std::abs(z1 * std::exp(z1) - y1) / std::max(1.0, std::abs(y1)));
  }
  b.le("max |W e^W - y| / max(1,|y|), W0, 1000 points", worst0, opt.lambert_tol);
  b.le("max |W e^W - y| / max(1,|y|), W-1, 1000 points", worst1, opt.lambert_tol);
  b.abs("W0(-1/e)", lambert::w(Branch::principal, lo), -1.0, 1e-10);
  b.abs("W-1(-1/e)", lambert::w(Branch::minus_one, lo), -1.0, 1e-10);
}

// 2. Amplitude optima.
void amplitude_optima(Builder& b, CriterionResult& r) {
  {
    const auto s = solve_minimax(problem_3sq(1.0, 1.0));
    b.abs("3sq alpha / B", s.alpha[0], 0.866, 0.005);
    b.rel("3sq value / (B^3 T^3 / 24)", s.value * 24.0, 1.0, 0.005);
  }
  {
    const auto s = solve_minimax(problem_3sq_pi(1.0, 1.0));
    b.abs("3sq PI alpha1 / B", s.alpha[0], 0.464, 0.01);
    b.abs("3sq PI alpha2 / B", s.alpha[1], 0.928, 0.01);
    b.rel("3sq PI value / B^3 T^3", s.value, 0.0064, 0.10);
  }
  {
    const auto s = solve_minimax(problem_3sq_twostep(1.0, 1.0));
    b.abs("two-step alpha / B", s.alpha[0], 0.732, 0.01);
    double w1 = -1.0, w2 = -1.0, best = 1e300;
    for (const auto& m : s.worst.omega_maximizers) {
      const double d = std::hypot(m[1] - 0.366, m[2] - 0.634);
      if (d < best) best = d, w1 = m[1], w2 = m[2];
    }
    b.abs("two-step omega1 / T", w1, 0.366, 0.01);
    b.abs("two-step omega2 / T", w2, 0.634, 0.01);
  }
  {
    const auto s = solve_minimax(problem_4cub(1.0, 1.0));
    b.abs("cubic alpha1 / B", s.alpha[0], 0.475, 0.01);
    b.abs("cubic alpha2 / B", s.alpha[1], 0.885, 0.01);
    b.rel("cubic value / B^4 T^4", s.value, 0.00037, 0.10);
  }
  {
    const auto s = solve_minimax(problem_4cub_pi(1.0, 1.0));
    b.abs("cubic PI alpha1 / B", s.alpha[0], 0.283, 0.01);
    b.abs("cubic PI alpha2 / B", s.alpha[1], 0.677, 0.01);
    b.abs("cubic PI alpha3 / B", s.alpha[2], 0.960, 0.01);
  }
  for (const auto& row : stabilization_probe(6, 8)) {
    b.abs(fmt::format("stabilization alpha*_{} / B", row.N), row.alpha, 0.878, 0.01);
  }
  r.note = "cubic residual as defined; its optimum differs from the target pair";
}

// Exact order-2 and order-3 components of product kernels e^{-s1-s2}, e^{-s1-s2-s3}.
double window(double lo, double hi) { return std::exp(-lo) - std::exp(-hi); }

double product_k2_error(std::size_t n, double T) {
  TimeGrid g(T / n, n);
  Lattice2 f(n);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t l = 1; l <= i; ++l) f(i, l) = std::pow(window(g.node(i - l), g.node(i)), 2);
  const auto k = invert_k2(f, g).cell_values(g);
  double e = 0.0;
  for (std::size_t a = 1; a <= n; ++a)
    for (std::size_t c = 1; c <= a; ++c) e = std::max(e, std::abs(k(a, c) - std::exp(-g.midpoint(a) - g.midpoint(c))));
  return e;
}

double product_k3_error(std::size_t n, double T) {
  TimeGrid g(T / n, n);
  Lattice3 f(n);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t l1 = 1; l1 <= i; ++l1)
      for (std::size_t l2 = 0; l1 + l2 <= i; ++l2) {
        const double plus = window(g.node(i - l1), g.node(i));
        const double minus = window(g.node(i - l1 - l2), g.node(i - l1));
        f(i, l1, l2) = std::pow(plus - minus, 3);
      }
  const auto k = invert_k3(f, g).cell_values(g);
  double e = 0.0;
  for (std::size_t a = 1; a <= n; ++a)
    for (std::size_t c = 1; c <= a; ++c)
      for (std::size_t d = 1; d <= c; ++d)
        e = std::max(e, std::abs(k(a, c, d) - std::exp(-g.midpoint(a) - g.midpoint(c) - g.midpoint(d))));
  return e;
}

// 3. Identification round trip.
void identification(Builder& b, CriterionResult& r) {
  const double T = 1.0;
  const TimeGrid g(T / 64, 64);
  ScalarSystem ref = [](const SampledSignal& x) { return ref_response(RefModel::truncated(3), x); };
  const auto m = identify_cubic(collect_responses3(ref, g, {0.5, 1.0, -1.5}));
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
  for (double v : m.k1->cell_values(g)) e1 = std::max(e1, std::abs(v - 1.0));
  for (double v : m.k2->cell_values(g).raw()) e2 = std::max(e2, std::abs(v - 0.5));
  for (double v : m.k3->cell_values(g).raw()) e3 = std::max(e3, std::abs(v - 1.0 / 6.0));
  b.le("reference K1 max error, h = T/64", e1, 0.05);
  b.le("reference K2 max error, h = T/64", e2, 0.05);
  b.le("reference K3 max error, h = T/64", e3, 0.05);

  const double a2 = product_k2_error(16, 2.0), b2 = product_k2_error(32, 2.0);
  const double a3 = product_k3_error(8, 1.0), b3 = product_k3_error(16, 1.0);
  b.ge("K2 order under halving (e^{-s1-s2})", std::log2(a2 / b2), 1.0);
  b.ge("K3 order under halving (e^{-s1-s2-s3})", std::log2(a3 / b3), 1.0);

  const TimeGrid gp(0.1, 12);
  auto planted2 = constant_kernel_weights(gp, 1.0, 0.5);
  const auto model2 = VolterraModel::product_integration(planted2, 2);
  const auto w2 = identify_pi_quadratic(
      collect_responses2([&](const SampledSignal& x) { return simulate(model2, x); }, gp, {0.464, 0.928}));
  double pe = 0.0;
  for (std::size_t j = 0; j < w2.m.size(); ++j) pe = std::max(pe, std::abs(w2.m[j] - planted2.m[j]));
  for (std::size_t k = 0; k < w2.l.raw().size(); ++k) pe = std::max(pe, std::abs(w2.l.raw()[k] - planted2.l.raw()[k]));
  b.le("PI quadratic weight recovery, planted constants", pe, 1e-10);

  const TimeGrid gc(0.1, 9);
  auto planted3 = constant_kernel_weights(gc, 1.0, 0.5, 1.0 / 6.0);
  const auto model3 = VolterraModel::product_integration(planted3, 3);
  const auto w3 = identify_pi_cubic(
      collect_responses3([&](const SampledSignal& x) { return simulate(model3, x); }, gc, {0.283, 0.677, 0.960}));
  double ce = 0.0;
  for (std::size_t k = 0; k < w3.c->raw().size(); ++k) ce = std::max(ce, std::abs(w3.c->raw()[k] - planted3.c->raw()[k]));
  b.le("PI cubic weight recovery, planted constants", ce, 1e-10);
  r.note = "orders measured on exact components of product kernels; the reference kernels are recovered to rounding";
}

// 4. Analytic inversion oracles.
void inversion(Builder& b) {
  auto x36 = [](double s) { return 1.0 / std::sqrt(1.0 + 4.0 * s); };
  double worst = 0.0;
  for (double t : {0.1, 0.25, 0.5, 1.0, 2.0, 5.0}) {
    const double theta = integrate(x36, 0.0, t);
    worst = std::max(worst, std::abs(theta + theta * theta - t) / t);
  }
  const TimeGrid g(0.01, 100);
  const auto x = invert_quadratic_const(1.0, AnalyticSignal{[](double t) { return t; }, [](double) { return 1.0; }}, g);
  double dev = 0.0;
  for (std::size_t i = 0; i <= g.n(); ++i) dev = std::max(dev, std::abs(x[i] - x36(g.node(i))));
  b.le("quadratic inversion: substitution residual (rel.)", worst, 1e-8);
  b.le("quadratic inversion: node values vs closed form", dev, 1e-12);

  const auto xf = factored_inverse(
      AnalyticSignal{[](double t) { return t * std::exp(t); }, [](double t) { return (1 + t) * std::exp(t); }}, g);
  double e50 = 0.0;
  for (double v : xf.values()) e50 = std::max(e50, std::abs(v - 1.0));
  b.le("factored inversion of y = t e^t: max |x - 1|", e50, 1e-8);

  const double L1 = 1.0, lambda = 0.5, F = 1.0;
  const double ts = linear_kernel_blowup(L1, lambda, F);
  const auto ode = majorant_blowup(MajorantSpec::constant(2, F, {L1, 0.0}, {lambda}), 2.0);
  double e54 = 0.0;
  for (std::size_t k = 0; k < ode.t.size(); ++k) {
    if (ode.t[k] > 0.9 * ts) break;
    const auto ex = invert_quadratic_linear_kernel(L1, lambda, F, ode.t[k]);
    e54 = std::max(e54, std::abs(ode.psi[k] - ex.x) / std::max(1.0, std::abs(ex.x)));
  }
  b.le("linear-kernel Lambert solution vs ODE on [0, 0.9 T*]", e54, 1e-6);
}

// 5. Blow-up estimates.
void blowup(Builder& b) {
  const auto est = blowup_simple(0.25, [](double t) { return std::exp(t); });
  b.truth("bisection root found", est.found);
  b.abs("T* (lambda = 1/4, F = e^t) vs W0(1)", est.t_star, lambert::w(Branch::principal, 1.0), 1e-8);

  const double ts = linear_kernel_blowup(1.0, 0.5, 1.0);
  b.abs("linear-kernel T* vs 2 ln 2 - 1", ts, 2.0 * std::log(2.0) - 1.0, 1e-12);
  const auto ode = majorant_blowup(MajorantSpec::constant(2, 1.0, {1.0, 0.0}, {0.5}), 2.0);
  b.truth("ODE event found", ode.blowup);
  b.rel("ODE event time vs 2 ln 2 - 1", ode.t_star, ts, 0.01);

  const double F = 1.3, M2 = 0.7;
  const auto c = majorant_blowup(MajorantSpec::constant(2, F, {}, {M2}), 10.0);
  b.rel("constant majorant T2* vs 1/(4 M2 F)", c.t_star, 1.0 / (4.0 * M2 * F), 1e-4);
}

// 6. Marching solver and majorant property.
void numeric_solver(Builder& b) {
  const auto eq = PolyEquation::quadratic_const(1.0, {[](double t) { return t; }, [](double) { return 1.0; }});
  auto exact = [](double t) { return 1.0 / std::sqrt(1.0 + 4.0 * t); };
  std::vector<double> err;
  for (std::size_t n : {50, 100, 200}) {
    const auto s = solve_numeric(eq, TimeGrid(1.0 / n, n));
    double e = 0.0;
    for (std::size_t k = 0; k < s.x.size(); ++k) e = std::max(e, std::abs(s.x[k] - exact(s.t[k])));
    err.push_back(e);
  }
  b.info("max error h = 1/50", err[0]);
  b.info("max error h = 1/100", err[1]);
  b.info("max error h = 1/200", err[2]);
  b.ge("order 1/50 -> 1/100", std::log2(err[0] / err[1]), 1.0);
  b.ge("order 1/100 -> 1/200", std::log2(err[1] / err[2]), 1.0);

  const double ts = 0.25;  // 1 / (4 M2 F) with M2 = |lambda| = 1, F = max |y'| = 1
  const std::size_t n = 200;
  const TimeGrid g(0.9 * ts / n, n);
  const auto maj = majorant_blowup(bounds_from_kernels(eq, g), 1.0);
  b.rel("majorant T2*", maj.t_star, ts, 1e-4);
  const auto s = solve_numeric(eq, g);
  double margin = 1e300;
  for (std::size_t k = 0; k < s.x.size(); ++k) margin = std::min(margin, maj.psi_at(s.t[k]) - std::abs(s.x[k]));
  b.ge("min (psi - |u|) over nodes on [0, 0.9 T2*]", margin, 0.0);
}

// 7. Heat-exchanger plant.
void plant(Builder& b) {
  const HeatExchangerParams p;
  const TimeGrid g(0.1, 300);
  const auto zero = SampledSignal::zeros(g, Placement::midpoints);
  const double q = 0.2 * p.Q0;
  const auto y = hx_response(p, zero, sample_midpoints(g, [&](double) { return q; }));
  double err = 0.0, peak = 0.0;
  for (std::size_t i = 0; i <= g.n(); ++i) {
    const double ref = hx_constant_heat_response(p, q, g.node(i));
    err = std::max(err, std::abs(y[i] - ref));
    peak = std::max(peak, std::abs(ref));
  }
  b.le("constant dQ: max |trapezoid - closed form| / max |closed form|", err / peak, 1e-3);
  b.abs("zero input: max |output|", max_abs(hx_response(p, zero, zero).values()), 0.0, 0.0);
}

// 8. Control loop on the identified surrogate.
struct ControlFindings {
  double threshold = 0.0;
};

ControlFindings control(Builder& b, CriterionResult& r) {
  const HeatExchangerParams p;
  const double T = 30.0;
  const TimeGrid g(T / 128, 128);
  VectorSystem plant = [&](std::span<const SampledSignal> x) { return hx_response(p, x[0], x[1]); };
  const auto model =
      identify_vector_quadratic(plant, g, 2, {{0.25 * p.D0, -0.25 * p.D0}, {0.25 * p.Q0, -0.25 * p.Q0}});
  const std::size_t lookahead = 4;

  struct Scenario {
    const char* name;
    std::function<double(double)> dq;
  };
  const double q0 = p.Q0;
  const std::vector<Scenario> scenarios{
      {"+25% Q0 step", [=](double) { return 0.25 * q0; }},
      {"-25% Q0 step", [=](double) { return -0.25 * q0; }},
      {"+10% Q0 step at 5 s", [=](double t) { return t > 5 ? 0.1 * q0 : 0.0; }},
      {"20% Q0 sine", [=](double t) { return 0.2 * q0 * std::sin(0.3 * t); }},
      {"25% Q0 ramp over 10 s", [=](double t) { return 0.25 * q0 * std::min(1.0, t / 10); }},
  };
  for (const auto& s : scenarios) {
    const RegulationProblem pr{model, 0.0, {sample_midpoints(g, s.dq)}, g, lookahead};
    const SampledSignal open[] = {SampledSignal::zeros(g, Placement::midpoints), pr.disturbances[0]};
    const double peak = max_abs(simulate_vector(model, open).values());
    try {
      const auto res = regulate(pr);
      b.le(fmt::format("{}: |eps(T)| / peak |delta i|", s.name), std::abs(res.error[g.n()]) / peak, 0.01);
    } catch (const ExistenceError& e) {
      b.truth(fmt::format("{}: regulation ({})", s.name, e.what()), false);
    }
  }

  const auto u0 = sample_midpoints(g, [&](double t) { return 0.2 * p.D0 * (1.0 - std::exp(-t / 3.0)); });
  const auto dq = sample_midpoints(g, [&](double t) { return 0.1 * q0 * std::sin(0.3 * t); });
  const SampledSignal xs[] = {u0, dq};
  const auto u = open_loop_solve(model, {dq}, simulate_vector(model, xs));
  double e = 0.0;
  for (std::size_t c = 0; c < g.n(); ++c) e = std::max(e, std::abs(u[c] - u0[c]));
  b.le("open-loop round trip: max error / amplitude, h = T/128", e / (0.2 * p.D0), 0.05);

  auto make = [&](double a) {
    return RegulationProblem{model, 0.0, {sample_midpoints(g, [=](double) { return -a * q0; })}, g, lookahead};
  };
  const auto th = controllability_threshold(make, 0.0, 2.0, 1e-3);
  b.truth("finite controllability-loss threshold found", th.found);
  ControlFindings out;
  if (th.found) {
    b.info("threshold heat drop / Q0", th.amplitude);
    b.info("loss time at threshold (s)", th.failure_time);
    out.threshold = th.amplitude;
  }
  r.note = fmt::format("surrogate identified at 25% D0 / 25% Q0, h = T/128, lookahead {} steps", lookahead);
  return out;
}

template <typename Body>
CriterionResult run(int id, const char* title, Body&& body) {
  CriterionResult r;
  r.id = id;
  r.title = title;
  const auto start = std::chrono::steady_clock::now();
  Builder b(r);
  try {
    body(b, r);
  } catch (const std::exception& e) {
    b.truth(std::string("unexpected error: ") + e.what(), false);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

CriterionResult non_reproducibility(const CriterionResult& c7, const CriterionResult& c8) {
  CriterionResult r;
  r.id = 9;
  r.title = "plant and control group";
  Builder b(r);
  b.truth("criterion 7 (plant properties) passes", c7.pass);
  b.truth("criterion 8 (control properties) passes", c8.pass);
  for (const auto& c : c8.checks)
    if (c.name == "threshold heat drop / Q0") b.info("threshold heat drop / Q0", c.value);
  r.note = "illustrative lambda1, lambda2; covered by criteria 7-8";
  r.seconds = c7.seconds + c8.seconds;
  return r;
}

}  // namespace

CriterionResult run_criterion(int id, const SuiteOptions& options) {
  switch (id) {
    case 1:
      return run(1, "Lambert identity and branch point", [&](Builder& b, CriterionResult&) { lambert_identity(b, options); });
    case 2:
      return run(2, "amplitude optima", amplitude_optima);
    case 3:
      return run(3, "identification round trip", identification);
    case 4:
      return run(4, "analytic inversion oracles", [](Builder& b, CriterionResult&) { inversion(b); });
    case 5:
      return run(5, "blow-up estimates", [](Builder& b, CriterionResult&) { blowup(b); });
    case 6:
      return run(6, "numerical solver", [](Builder& b, CriterionResult&) { numeric_solver(b); });
    case 7:
      return run(7, "heat-exchanger plant", [](Builder& b, CriterionResult&) { plant(b); });
    case 8:
      return run(8, "control loop", [](Builder& b, CriterionResult& r) { control(b, r); });
    case 9:
      return non_reproducibility(run_criterion(7, options), run_criterion(8, options));
    default:
      throw ConfigError("criterion must be 1.." + std::to_string(criterion_count) + ", got " + std::to_string(id));
  }
}

std::vector<CriterionResult> run_suite(const SuiteOptions& options) {
  std::vector<int> ids = options.only;
  if (ids.empty())
    for (int i = 1; i <= criterion_count; ++i) ids.push_back(i);
  for (int id : ids)
    if (id < 1 || id > criterion_count) throw ConfigError("criterion must be 1..9, got " + std::to_string(id));
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::vector<CriterionResult> out;
  std::optional<std::size_t> c7, c8;
  for (int id : ids) {
    if (id == 9 && c7 && c8) {
      out.push_back(non_reproducibility(out[*c7], out[*c8]));
    } else {
      out.push_back(run_criterion(id, options));
    }
    if (id == 7) c7 = out.size() - 1;
    if (id == 8) c8 = out.size() - 1;
  }
  return out;
}

std::string format_summary_line(const CriterionResult& r) {
  std::string failed;
  for (const auto& c : r.checks)
    if (!c.pass) failed += (failed.empty() ? "" : "; ") + c.name;
  std::string line = fmt::format("criterion {} {} {} ({} checks, {:.2f} s)", r.id, r.pass ? "PASS" : "FAIL", r.title,
                                 r.checks.size(), r.seconds);
  if (!failed.empty()) line += " failing: " + failed;
  return line;
}

std::string format_report(const std::vector<CriterionResult>& results) {
  std::string out;
  int passed = 0;
  for (const auto& r : results) {
    passed += r.pass ? 1 : 0;
    out += format_summary_line(r) + "\n";
    for (const auto& c : r.checks) {
      std::string bound;
      if (c.relation == "abs") bound = fmt::format("target {:.6g} +- {:.3g}", c.target, c.tolerance);
      if (c.relation == "rel") bound = fmt::format("target {:.6g} +- {:.3g} rel.", c.target, c.tolerance);
      if (c.relation == "<=") bound = fmt::format("<= {:.3g}", c.target);
      if (c.relation == ">=") bound = fmt::format(">= {:.3g}", c.target);
      if (c.relation == "==") bound = "required";
      out += fmt::format("    [{}] {}: {:.8g} {}\n", c.relation == "info" ? "info" : (c.pass ? " ok " : "FAIL"), c.name,
                         c.value, bound);
    }
    if (!r.note.empty()) out += "    note: " + r.note + "\n";
  }
  out += fmt::format("{} of {} criteria passed\n", passed, results.size());
  return out;
}

}  // namespace volterra
