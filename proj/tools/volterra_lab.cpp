#include <fmt/format.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "volterra/amplitude_opt.hpp"
#include "volterra/config.hpp"
#include "volterra/control.hpp"
#include "volterra/errors.hpp"
#include "volterra/identification.hpp"
#include "volterra/io.hpp"
#include "volterra/lambert.hpp"
#include "volterra/polyeq.hpp"
#include "volterra/reference_models.hpp"
#include "volterra/simulation.hpp"
#include "volterra/suite.hpp"
#include "volterra/test_signals.hpp"

namespace fs = std::filesystem;
using namespace volterra;

namespace {

enum ExitCode { ok = 0, failed_criteria = 1, config_error = 2, numerical_error = 3, io_error = 4 };

struct Common {
  std::string config;
  std::optional<double> h;
  std::optional<std::size_t> n;
  std::string out = ".";
};

// Loaded config with the grid overrides applied, plus the run log.
class Run {
 public:
  Run(const Common& c, const std::string& name) : name_(name), outputs_(c.out) {
    if (!c.config.empty()) cfg_ = RunConfig::load(c.config);
    apply_grid_overrides(c);
  }

  RunConfig& cfg() { return cfg_; }
  TimeGrid grid() const { return cfg_.grid(); }
  OutputSet& outputs() { return outputs_; }

  template <typename... Args>
  void log(fmt::format_string<Args...> f, Args&&... args) {
    const auto line = fmt::format(f, std::forward<Args>(args)...);
    std::printf("%s\n", line.c_str());
    log_ += line + "\n";
  }

  void finish() {
    outputs_.add(name_ + ".log", log_);
    outputs_.commit();
  }

 private:
  void apply_grid_overrides(const Common& c) {
    if (!c.h && !c.n) return;
    if (c.h && !(*c.h > 0.0)) throw ConfigError("--h must be positive");
    if (c.n && *c.n == 0) throw ConfigError("--n must be positive");
    std::optional<double> horizon = cfg_.find_double("grid.T");
    if (!horizon && cfg_.has("grid.h") && cfg_.has("grid.n")) horizon = cfg_.grid().horizon();
    double h = 0.0;
    std::size_t n = 0;
    if (c.h && c.n) {
      h = *c.h, n = *c.n;
    } else if (c.n) {
      if (!horizon) throw ConfigError("--n alone needs a horizon ([grid] T, or h and n)");
      n = *c.n, h = *horizon / static_cast<double>(n);
    } else {
      if (!horizon) throw ConfigError("--h alone needs a horizon ([grid] T, or h and n)");
      h = *c.h;
      n = static_cast<std::size_t>(std::llround(*horizon / h));
      if (n == 0 || std::abs(static_cast<double>(n) * h - *horizon) > 1e-9 * *horizon) {
        throw ConfigError(fmt::format("--h {} does not divide the horizon {}", h, *horizon));
      }
    }
    cfg_.set("grid.h", h);
    cfg_.set("grid.n", static_cast<double>(n));
    cfg_.set("grid.T", h * static_cast<double>(n));
  }

  std::string name_;
  RunConfig cfg_;
  OutputSet outputs_;
  std::string log_;
};

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

CsvTable columns(std::vector<std::string> names, const std::vector<std::vector<double>>& cols) {
  CsvTable t{std::move(names), {}};
  const std::size_t rows = cols.empty() ? 0 : cols[0].size();
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> r;
    for (const auto& c : cols) r.push_back(c[i]);
    t.rows.push_back(std::move(r));
  }
  return t;
}

std::vector<double> times(const SampledSignal& s) {
  std::vector<double> t(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = s.time(i);
  return t;
}

std::vector<double> as_vector(const SampledSignal& s) { return {s.values().begin(), s.values().end()}; }

// Input signal from [signals]: a CSV file, or a shape with amplitude.
SampledSignal input_signal(const RunConfig& cfg, const TimeGrid& g, const std::string& section) {
  if (cfg.has(section + ".input")) return read_signal(cfg.get_path(section + ".input"), g, Placement::midpoints);
  const auto shape = cfg.get_string(section + ".shape", "step");
  const double a = cfg.get_double(section + ".amplitude", 1.0);
  const double start = cfg.get_double(section + ".start", 0.0);
  const double freq = cfg.get_double(section + ".frequency", 1.0);
  const double width = cfg.get_double(section + ".width", g.horizon());
  if (shape == "step") return sample_midpoints(g, [=](double t) { return t >= start ? a : 0.0; });
  if (shape == "pulse") return sample_midpoints(g, [=](double t) { return t >= start && t < start + width ? a : 0.0; });
  if (shape == "sine") return sample_midpoints(g, [=](double t) { return a * std::sin(freq * t); });
  if (shape == "ramp") return sample_midpoints(g, [=](double t) { return a * std::min(1.0, t / width); });
  throw ConfigError("[" + section + ".shape] must be step, pulse, sine or ramp, got '" + shape + "'");
}

// Scalar model from [model]: reference kernels, grid kernel files or PI weight files.
VolterraModel load_model(const RunConfig& cfg, const TimeGrid& g) {
  const auto mode = cfg.get_string("model.mode", "reference");
  const int degree = static_cast<int>(cfg.get_int("model.degree", 3));
  if (degree < 1 || degree > 3) throw ConfigError("[model.degree] must be 1, 2 or 3");
  if (mode == "reference") {
    auto k1 = Kernel1::analytic([](double) { return 1.0; });
    auto k2 = Kernel2::analytic([](double, double) { return 0.5; });
    auto k3 = Kernel3::analytic([](double, double, double) { return 1.0 / 6.0; });
    if (degree == 1) return VolterraModel::linear(k1);
    if (degree == 2) return VolterraModel::quadratic(k1, k2);
    return VolterraModel::cubic(k1, k2, k3);
  }
  if (mode == "grid") {
    auto k1 = Kernel1::on_grid(g, read_kernel1(cfg.get_path("model.k1"), g.n()));
    if (degree == 1) return VolterraModel::linear(k1);
    auto k2 = Kernel2::on_grid(g, read_kernel2(cfg.get_path("model.k2"), g.n()));
    if (degree == 2) return VolterraModel::quadratic(k1, k2);
    return VolterraModel::cubic(k1, k2, Kernel3::on_grid(g, read_kernel3(cfg.get_path("model.k3"), g.n())));
  }
  if (mode == "pi") {
    if (degree < 2) throw ConfigError("product-integration models need degree 2 or 3");
    PiWeights w(g, degree == 3);
    w.m = read_kernel1(cfg.get_path("model.m"), g.n());
    w.l = read_kernel2(cfg.get_path("model.l"), g.n());
    if (degree == 3) w.c = read_kernel3(cfg.get_path("model.c"), g.n());
    return VolterraModel::product_integration(std::move(w), degree);
  }
  throw ConfigError("[model.mode] must be reference, grid or pi, got '" + mode + "'");
}

void write_vector_model(OutputSet& out, const VectorQuadraticModel& m, const TimeGrid& g) {
  for (std::size_t c = 0; c < m.p; ++c) {
    out.add(fmt::format("k1_{}.csv", c), kernel_table(m.linear[c].cell_values(g)));
    out.add(fmt::format("k2_{}.csv", c), kernel_table(m.quadratic[c].cell_values(g)));
  }
  for (const auto& [key, k] : m.cross) out.add(fmt::format("cross_{}{}.csv", key.first, key.second), kernel_table(k.cell_values(g)));
}

VectorQuadraticModel read_vector_model(const fs::path& dir, const TimeGrid& g) {
  VectorQuadraticModel m;
  m.p = 2;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto k1 = dir / fmt::format("k1_{}.csv", c);
    const auto k2 = dir / fmt::format("k2_{}.csv", c);
    if (!fs::exists(k1) || !fs::exists(k2)) throw IoError("vector model files missing in " + dir.string());
    m.linear.push_back(Kernel1::on_grid(g, read_kernel1(k1, g.n())));
    m.quadratic.push_back(Kernel2::on_grid(g, read_kernel2(k2, g.n())));
  }
  const auto cross = dir / "cross_01.csv";
  if (fs::exists(cross)) m.cross.emplace(std::pair<std::size_t, std::size_t>{0, 1}, CrossKernel::on_grid(g, read_cross_kernel(cross, g.n())));
  return m;
}

VectorQuadraticModel hx_surrogate(const RunConfig& cfg, const TimeGrid& g, const HeatExchangerParams& p) {
  const double fd = cfg.get_double("control.identify_fraction_D", 0.25);
  const double fq = cfg.get_double("control.identify_fraction_Q", 0.25);
  VectorSystem plant = [&](std::span<const SampledSignal> x) { return hx_response(p, x[0], x[1]); };
  return identify_vector_quadratic(plant, g, 2, {{fd * p.D0, -fd * p.D0}, {fq * p.Q0, -fq * p.Q0}});
}

// lambert ------------------------------------------------------------------

struct LambertArgs {
  std::optional<double> y;
  int branch = 0;
  std::optional<double> from, to;
};

int cmd_lambert(const Common& c, const LambertArgs& a) {
  Run run(c, "lambert");
  if (a.branch != 0 && a.branch != -1) throw ConfigError("--branch must be 0 or -1");
  const auto br = a.branch == 0 ? lambert::Branch::principal : lambert::Branch::minus_one;
  if (a.y) {
    const double w = lambert::w(br, *a.y);
    run.log("W{}({}) = {:.17g}", a.branch, *a.y, w);
    run.log("check: W e^W - y = {:.3g}", w * std::exp(w) - *a.y);
  }
  if (a.from || a.to) {
    if (!a.from || !a.to) throw ConfigError("--from and --to go together");
    const std::size_t n = c.n.value_or(100);
    std::vector<double> ys, ws;
    for (std::size_t k = 0; k <= n; ++k) {
      const double y = *a.from + (*a.to - *a.from) * static_cast<double>(k) / static_cast<double>(n);
      ys.push_back(y);
      ws.push_back(lambert::w(br, y));
    }
    run.outputs().add("lambert.csv", columns({"y", "w"}, {ys, ws}));
    run.log("tabulated W{} at {} points on [{}, {}]", a.branch, n + 1, *a.from, *a.to);
  }
  if (!a.y && !a.from) throw ConfigError("lambert needs --y or --from/--to");
  run.finish();
  return ok;
}

// signals ------------------------------------------------------------------

int cmd_signals(const Common& c) {
  Run run(c, "signals");
  auto& cfg = run.cfg();
  const auto g = run.grid();
  TestFamilySpec spec;
  spec.m = static_cast<int>(cfg.get_int("signals.m", 2));
  spec.amplitudes = cfg.get_list("signals.amplitudes");
  spec.omegas = cfg.get_list("signals.omegas");
  spec.validate();
  const auto report = validate_amplitudes(spec, cfg.get_bool("signals.pi_mode", false));
  if (!report.ok) run.log("warning: {}", report.message);
  std::vector<std::string> names{"t"};
  std::vector<std::vector<double>> cols;
  for (std::size_t k = 0; k < spec.amplitudes.size(); ++k) {
    const auto s = build_signal(spec, k, g);
    if (cols.empty()) cols.push_back(times(s));
    names.push_back(fmt::format("x{}", k + 1));
    cols.push_back(as_vector(s));
  }
  run.outputs().add("signals.csv", columns(names, cols));
  run.log("family m = {}, {} members on h = {}, n = {}", spec.m, spec.amplitudes.size(), g.h(), g.n());
  run.finish();
  return ok;
}

// identify -----------------------------------------------------------------

int cmd_identify(const Common& c) {
  Run run(c, "identify");
  auto& cfg = run.cfg();
  const auto g = run.grid();
  const auto plant = cfg.get_string("plant.type", "reference");
  if (plant == "hx") {
    const auto p = cfg.plant_hx();
    const auto m = hx_surrogate(cfg, g, p);
    write_vector_model(run.outputs(), m, g);
    run.log("identified 2-channel quadratic surrogate of the heat exchanger on h = {}, n = {}", g.h(), g.n());
    run.finish();
    return ok;
  }
  if (plant != "reference") throw ConfigError("[plant.type] must be reference or hx, got '" + plant + "'");

  const long order = cfg.get_int("plant.order", 3);
  const auto model = order <= 0 ? RefModel::infinite() : RefModel::truncated(static_cast<int>(order));
  ScalarSystem system = [model](const SampledSignal& x) { return ref_response(model, x); };
  const int degree = static_cast<int>(cfg.get_int("model.degree", 3));
  const auto mode = cfg.get_string("model.mode", "grid");
  if (degree != 2 && degree != 3) throw ConfigError("[model.degree] must be 2 or 3 for identification");
  auto amps = cfg.get_list("signals.amplitudes");
  if (amps.empty()) {
    if (mode == "pi") amps = degree == 2 ? std::vector<double>{0.464, 0.928} : std::vector<double>{0.283, 0.677, 0.960};
    else amps = degree == 2 ? std::vector<double>{1.0, -1.0} : std::vector<double>{0.5, 1.0, -1.5};
  }
  const double scale = cfg.get_double("signals.B", 1.0);
  for (double& a : amps) a *= scale;

  if (mode == "grid") {
    const auto m = degree == 2 ? identify_quadratic(collect_responses2(system, g, amps))
                               : identify_cubic(collect_responses3(system, g, amps));
    run.outputs().add("k1.csv", kernel_table(m.k1->cell_values(g)));
    run.outputs().add("k2.csv", kernel_table(m.k2->cell_values(g)));
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    for (double v : m.k1->cell_values(g)) e1 = std::max(e1, std::abs(v - 1.0));
    for (double v : m.k2->cell_values(g).raw()) e2 = std::max(e2, std::abs(v - 0.5));
    if (degree == 3) {
      const auto k3 = m.k3->cell_values(g);
      run.outputs().add("k3.csv", kernel_table(k3));
      for (double v : k3.raw()) e3 = std::max(e3, std::abs(v - 1.0 / 6.0));
    }
    run.log("grid kernels, degree {}, h = {}, n = {}", degree, g.h(), g.n());
    run.log("max |K1 - 1| = {:.3g}, max |K2 - 1/2| = {:.3g}{}", e1, e2,
            degree == 3 ? fmt::format(", max |K3 - 1/6| = {:.3g}", e3) : std::string());
  } else if (mode == "pi") {
    const auto w = degree == 2 ? identify_pi_quadratic(collect_responses2(system, g, amps))
                               : identify_pi_cubic(collect_responses3(system, g, amps));
    run.outputs().add("m.csv", kernel_table(w.m));
    run.outputs().add("l.csv", kernel_table(w.l));
    if (w.c) run.outputs().add("c.csv", kernel_table(*w.c));
    run.log("product-integration weights, degree {}, h = {}, n = {}", degree, g.h(), g.n());
  } else {
    throw ConfigError("[model.mode] must be grid or pi for identification, got '" + mode + "'");
  }
  run.finish();
  return ok;
}

// simulate -----------------------------------------------------------------

int cmd_simulate(const Common& c) {
  Run run(c, "simulate");
  auto& cfg = run.cfg();
  const auto g = run.grid();
  const auto x = input_signal(cfg, g, "signals");
  const auto model = load_model(cfg, g);
  const auto y = simulate(model, x);
  std::vector<std::string> names{"t", "y"};
  std::vector<std::vector<double>> cols{times(y), as_vector(y)};
  if (cfg.get_string("model.mode", "reference") == "reference") {
    const auto exact = ref_response(RefModel::infinite(), x);
    double dev = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dev = std::max(dev, std::abs(y[i] - exact[i]));
    const double theta = max_abs(cumulative_integral(x).values());
    double tail = std::expm1(theta), term = 1.0;
    for (int m = 1; m <= model.degree; ++m) tail -= (term *= theta / m);
    names.push_back("exp_theta_minus_1");
    cols.push_back(as_vector(exact));
    run.log("max |y - (e^Theta - 1)| = {:.6g} (truncation bound {:.6g})", dev, tail);
  }
  run.outputs().add("response.csv", columns(names, cols));
  run.log("simulated degree-{} model on h = {}, n = {}; y(T) = {:.10g}", model.degree, g.h(), g.n(), y[g.n()]);
  run.finish();
  return ok;
}

// optimize -----------------------------------------------------------------

struct OptimizeArgs {
  std::string problem;
  std::optional<double> B, T, tol;
  int n_min = 3, n_max = 8;
};

int cmd_optimize(const Common& c, const OptimizeArgs& a) {
  Run run(c, "optimize");
  auto& cfg = run.cfg();
  const auto name = a.problem.empty() ? cfg.get_string("optimize.problem", "3sq") : a.problem;
  const double B = a.B.value_or(cfg.get_double("optimize.B", 1.0));
  const double T = a.T.value_or(cfg.get_double("optimize.T", 1.0));
  const double tol = a.tol.value_or(cfg.get_double("optimize.tol", 1e-4));
  if (!(B > 0.0) || !(T > 0.0)) throw ConfigError("B and T must be positive");

  if (name == "stabilization") {
    std::vector<double> ns, as, vs;
    for (const auto& row : stabilization_probe(a.n_min, a.n_max, B, T)) {
      run.log("N = {}: alpha* = {:.4f} B, value = {:.6g}", row.N, row.alpha / B, row.value);
      ns.push_back(row.N), as.push_back(row.alpha), vs.push_back(row.value);
    }
    run.outputs().add("optimize.csv", columns({"N", "alpha", "value"}, {ns, as, vs}));
    run.finish();
    return ok;
  }

  const auto problem = name == "3sq_pi_constrained" ? problem_3sq_pi_constrained(B, T) : problem_by_name(name, B, T);
  const auto r = solve_minimax(problem, tol);
  std::string alphas;
  for (double v : r.alpha) alphas += fmt::format("{}{:.4f} B", alphas.empty() ? "" : ", ", v / B);
  run.log("problem {}: alpha* = ({})", name, alphas);
  run.log("minimax value = {:.6g}", r.value);
  if (name == "3sq") run.log("B^3 T^3 / 24 = {:.6g}", B * B * B * T * T * T / 24.0);
  if (problem.has_omegas) {
    for (const auto& m : r.worst.omega_maximizers)
      run.log("worst case: beta = {:.4f} B, omega = ({:.4f} T, {:.4f} T)", m[0] / B, m[1] / T, m[2] / T);
  } else {
    for (double m : r.worst.maximizers) run.log("worst case: beta = {:.4f} B", m / B);
  }
  std::vector<std::string> names;
  std::vector<double> row;
  for (std::size_t k = 0; k < r.alpha.size(); ++k) names.push_back(fmt::format("alpha{}", k + 1)), row.push_back(r.alpha[k]);
  names.insert(names.end(), {"value", "beta", "omega1", "omega2"});
  row.insert(row.end(), {r.value, r.worst.beta, r.worst.w1, r.worst.w2});
  run.outputs().add("optimize.csv", CsvTable{names, {row}});
  run.finish();
  return ok;
}

// solve --------------------------------------------------------------------

int cmd_solve(const Common& c) {
  Run run(c, "solve");
  auto& cfg = run.cfg();
  const auto g = run.grid();
  const auto kind = cfg.get_string("solve.equation", "quadratic_const");
  const auto rule_name = cfg.get_string("solve.rule", "midpoint");
  const auto rule = rule_name == "midpoint"         ? Quadrature::midpoint
                    : rule_name == "right_rectangle" ? Quadrature::right_rectangle
                                                     : throw ConfigError("[solve.rule] must be midpoint or right_rectangle");
  const double lambda = cfg.get_double("solve.lambda", 1.0);
  const double F = cfg.get_double("solve.F", 1.0);

  PolyEquation eq;
  std::function<double(double)> exact;
  if (kind == "quadratic_const") {
    eq = PolyEquation::quadratic_const(lambda, {[F](double t) { return F * t; }, [F](double) { return F; }});
    exact = [=](double t) {
      const double d = 1.0 + 4.0 * lambda * F * t;
      if (d <= 0.0) throw ExistenceError(fmt::format("exact solution ends at t = {}", t), t);
      return F / std::sqrt(d);
    };
  } else if (kind == "linear_kernel") {
    const double L1 = cfg.get_double("solve.L1", 1.0);
    eq = PolyEquation::quadratic_linear_kernel(L1, lambda, F);
    exact = [=](double t) { return invert_quadratic_linear_kernel(L1, lambda, F, t).x; };
  } else {
    throw ConfigError("[solve.equation] must be quadratic_const or linear_kernel, got '" + kind + "'");
  }

  const auto s = solve_numeric(eq, g, rule);
  std::vector<double> ex(s.x.size());
  double err = 0.0;
  for (std::size_t k = 0; k < s.x.size(); ++k) {
    ex[k] = exact(s.t[k]);
    err = std::max(err, std::abs(s.x[k] - ex[k]));
  }
  run.outputs().add("solution.csv", columns({"t", "x", "exact"}, {s.t, s.x, ex}));
  run.log("{} equation, {} rule, h = {}, n = {}", kind, rule_name, g.h(), g.n());
  run.log("max |x - exact| = {:.6g}", err);
  run.finish();
  return ok;
}

// blowup -------------------------------------------------------------------

int cmd_blowup(const Common& c) {
  Run run(c, "blowup");
  auto& cfg = run.cfg();
  const double lambda = cfg.get_double("solve.lambda", 0.5);
  const double F = cfg.get_double("solve.F", 1.0);
  const double L1 = cfg.get_double("solve.L1", 0.0);
  const double horizon = cfg.has("grid.T") || cfg.has("grid.n") ? run.grid().horizon() : 10.0;
  if (!(F >= 0.0)) throw ConfigError("[solve.F] must be nonnegative");

  const auto simple = blowup_simple(lambda, [F](double) { return F; });
  if (simple.found) run.log("T F(T) = 1/(4|lambda|) root: T* = {:.12g}", simple.t_star);
  else run.log("T F(T) = 1/(4|lambda|) has no root");
  if (L1 > 0.0 && lambda > 0.0 && F > 0.0) {
    run.log("linear-kernel Lambert estimate: T* = {:.12g}", linear_kernel_blowup(L1, lambda, F));
  }
  const auto maj = majorant_blowup(MajorantSpec::constant(2, F, {L1, 0.0}, {std::abs(lambda)}), horizon);
  if (maj.blowup) run.log("majorant ODE event: T* = {:.12g}", maj.t_star);
  else run.log("majorant ODE: no blow-up before {}", horizon);
  std::vector<double> psi = maj.psi;
  for (double& v : psi)
    if (!std::isfinite(v)) v = HUGE_VAL;
  run.outputs().add("majorant.csv", columns({"t", "theta", "psi"}, {maj.t, maj.theta, psi}));
  run.finish();
  return ok;
}

// control ------------------------------------------------------------------

struct ControlArgs {
  bool threshold = false;
};

int cmd_control(const Common& c, const ControlArgs& a) {
  Run run(c, "control");
  auto& cfg = run.cfg();
  const auto g = run.grid();
  const auto p = cfg.plant_hx();
  const auto model = cfg.has("control.model_dir") ? read_vector_model(cfg.get_path("control.model_dir"), g)
                                                 : hx_surrogate(cfg, g, p);
  std::size_t lookahead = static_cast<std::size_t>(std::max(1L, cfg.get_int("control.lookahead", 1)));
  if (const auto lt = cfg.find_double("control.lookahead_time")) {
    lookahead = static_cast<std::size_t>(std::max(1.0, std::round(*lt / g.h())));
  }
  const double setpoint = cfg.get_double("control.setpoint", 0.0);

  SampledSignal dq = cfg.has("control.disturbance")
                         ? read_signal(cfg.get_path("control.disturbance"), g, Placement::midpoints)
                         : sample_midpoints(g, [&](double t) {
                             return t >= cfg.get_double("control.start", 0.0) ? cfg.get_double("control.fraction_Q", 0.25) * p.Q0 : 0.0;
                           });
  const RegulationProblem pr{model, setpoint, {dq}, g, lookahead};
  const SampledSignal open[] = {SampledSignal::zeros(g, Placement::midpoints), dq};
  const double peak = max_abs(simulate_vector(model, open).values());

  const auto r = regulate(pr);
  run.outputs().add("control.csv", signal_table(r.control, "u"));
  run.outputs().add("output.csv", signal_table(r.output, "y"));
  run.outputs().add("error.csv", signal_table(r.error, "eps"));
  run.log("regulated on h = {}, n = {}, lookahead {} steps, setpoint {}", g.h(), g.n(), lookahead, setpoint);
  run.log("terminal miscoordination eps(T) = {:.6g}", r.error[g.n()]);
  run.log("peak uncontrolled |delta i| = {:.6g}; ratio {:.3g}", peak, std::abs(r.error[g.n()]) / peak);
  run.log("u(T) = {:.6g}", r.control[g.n() - 1]);
  if (a.threshold) {
    auto make = [&](double s) {
      return RegulationProblem{model, setpoint, {sample_midpoints(g, [&, s](double t) {
                                 return t >= cfg.get_double("control.start", 0.0) ? -s * p.Q0 : 0.0;
                               })},
                               g, lookahead};
    };
    const auto th = controllability_threshold(make, 0.0, cfg.get_double("control.threshold_max", 2.0));
    if (th.found) run.log("controllability lost for heat drops beyond {:.4f} Q0 (at t = {})", th.amplitude, th.failure_time);
    else run.log("no controllability loss for heat drops up to {} Q0", cfg.get_double("control.threshold_max", 2.0));
  }
  run.finish();
  return ok;
}

// paper-suite --------------------------------------------------------------

struct SuiteArgs {
  bool json = false;
  std::vector<int> only;
  double lambert_tol = 1e-12;
};

int cmd_suite(const SuiteArgs& a) {
  SuiteOptions opt;
  opt.only = a.only;
  opt.lambert_tol = a.lambert_tol;
  const auto results = run_suite(opt);
  bool all = true;
  for (const auto& r : results) all = all && r.pass;
  if (a.json) {
    nlohmann::json j;
    j["pass"] = all;
    j["criteria"] = nlohmann::json::array();
    for (const auto& r : results) {
      nlohmann::json cj{{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"note", r.note}, {"seconds", r.seconds}};
      cj["checks"] = nlohmann::json::array();
      for (const auto& ch : r.checks) {
        cj["checks"].push_back({{"name", ch.name},
                                {"value", ch.value},
                                {"target", ch.target},
                                {"tolerance", ch.tolerance},
                                {"relation", ch.relation},
                                {"pass", ch.pass}});
      }
      j["criteria"].push_back(cj);
    }
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    std::printf("%s", format_report(results).c_str());
  }
  return all ? ok : failed_criteria;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volterra polynomial identification, simulation, inversion and control"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "print this help and exit");
    sub->add_option("-c,--config", common.config, "INI run configuration");
    sub->add_option("--h", common.h, "grid step override");
    sub->add_option("--n", common.n, "grid cell count override");
    sub->add_option("-o,--out", common.out, "output directory")->capture_default_str();
  };

  LambertArgs la;
  auto* lam = app.add_subcommand("lambert", "evaluate or tabulate the real Lambert W branches");
  add_common(lam);
  lam->add_option("--y", la.y, "argument");
  lam->add_option("--branch", la.branch, "0 (principal) or -1")->capture_default_str();
  lam->add_option("--from", la.from, "table start");
  lam->add_option("--to", la.to, "table end (n + 1 points)");

  auto* sig = app.add_subcommand("signals", "build a piecewise-constant test-signal family");
  add_common(sig);
  auto* idn = app.add_subcommand("identify", "identify kernels or weights from a plant");
  add_common(idn);
  auto* sim = app.add_subcommand("simulate", "simulate a Volterra polynomial model");
  add_common(sim);

  OptimizeArgs oa;
  auto* opt = app.add_subcommand("optimize", "test-amplitude minimax problems");
  add_common(opt);
  opt->add_option("--problem", oa.problem, "3sq, 3sq_pi, 3sq_pi_constrained, 3sq_twostep, 4cub, 4cub_pi, stabilization");
  opt->add_option("--B", oa.B, "amplitude bound");
  opt->add_option("--T", oa.T, "horizon");
  opt->add_option("--tol", oa.tol, "amplitude tolerance in units of B");
  opt->add_option("--n-min", oa.n_min, "stabilization: smallest N")->capture_default_str();
  opt->add_option("--n-max", oa.n_max, "stabilization: largest N")->capture_default_str();

  auto* sol = app.add_subcommand("solve", "solve a quadratic Volterra equation of the first kind");
  add_common(sol);
  auto* blo = app.add_subcommand("blowup", "blow-up estimates for the quadratic equation");
  add_common(blo);

  ControlArgs ca;
  auto* ctl = app.add_subcommand("control", "delayed-feedback regulation of the heat exchanger");
  add_common(ctl);
  ctl->add_flag("--threshold", ca.threshold, "also bisect the controllability-loss threshold");

  SuiteArgs sa;
  auto* suite = app.add_subcommand("paper-suite", "rerun all acceptance criteria");
  suite->add_flag("--json", sa.json, "machine-readable report");
  suite->add_option("--criteria", sa.only, "subset of criteria (1..9)");
  suite->add_option("--lambert-tol", sa.lambert_tol, "tolerance factor of the Lambert identity check")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*lam) return cmd_lambert(common, la);
    if (*sig) return cmd_signals(common);
    if (*idn) return cmd_identify(common);
    if (*sim) return cmd_simulate(common);
    if (*opt) return cmd_optimize(common, oa);
    if (*sol) return cmd_solve(common);
    if (*blo) return cmd_blowup(common);
    if (*ctl) return cmd_control(common, ca);
    if (*suite) return cmd_suite(sa);
  } catch (const ExistenceError& e) {
    std::fprintf(stderr, "error: %s (t = %g)\n", e.what(), e.at());
    return numerical_error;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind()) {
      case ErrorKind::config:
        return config_error;
      case ErrorKind::numerical:
        return numerical_error;
      case ErrorKind::io:
        return io_error;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return config_error;
  }
  return ok;
}
