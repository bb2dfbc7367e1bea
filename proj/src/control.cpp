#include "volterra/control.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>

#include "volterra/errors.hpp"

namespace volterra {

namespace {

struct Quadratic {
  double a = 0.0;  // v^2
  double b = 0.0;  // v
  double c = 0.0;  // constant
};

// Output at node m as a quadratic in v, where channel-0 samples m-d..m-1
// (lags 1..d) all equal v.
Quadratic output_in_unknown(const VectorWeights& w, std::vector<std::vector<double>>& x, std::size_t m,
                            std::size_t d) {
  auto& x0 = x[0];
  for (std::size_t a = 1; a <= d; ++a) x0[m - a] = 0.0;
  std::vector<std::span<const double>> xs(x.begin(), x.end());

  Quadratic q;
  q.c = vector_output_at(w, xs, m);
  const auto& lin = w.linear[0];
  const auto& quad = w.quadratic[0];
  for (std::size_t a = 1; a <= d; ++a) {
    q.b += lin[a - 1];
    for (std::size_t b = 1; b <= d; ++b) q.a += quad(a, b);
    for (std::size_t b = d + 1; b <= m; ++b) q.b += 2.0 * quad(a, b) * x0[m - b];
  }
  for (const auto& [key, table] : w.cross) {
    if (key.first != 0) continue;
    const auto& xk = x[key.second];
    for (std::size_t a = 1; a <= d; ++a) {
      for (std::size_t b = 1; b <= m; ++b) q.b += table(a, b) * xk[m - b];
    }
  }
  return q;
}

// Root of a v^2 + b v + c = target on a branch identified by the sign of
// the slope 2 a v + b there (+-sqrt(disc)); branches only meet where the
// discriminant vanishes. Without a branch, the root continuing the linear
// solution -c / b is taken.
struct Root {
  double value = 0.0;
  double branch = 1.0;
};

Root solve_root(const Quadratic& q, double target, const std::optional<double>& branch, double at, const char* who) {
  const double c = q.c - target;
  if (q.a == 0.0) {
    if (q.b == 0.0) throw ExistenceError(std::string(who) + ": control has no effect at t = " + std::to_string(at), at);
    return {-c / q.b, q.b >= 0.0 ? 1.0 : -1.0};
  }
  const double disc = q.b * q.b - 4.0 * q.a * c;
  if (disc < 0.0) {
    throw ExistenceError(std::string(who) + ": no real control at t = " + std::to_string(at) + " (discriminant " +
                             std::to_string(disc) + ")",
                         at);
  }
  const double sb = q.b >= 0.0 ? 1.0 : -1.0;
  const double sign = branch.value_or(sb);
  const double qq = -0.5 * (q.b + sb * std::sqrt(disc));
  // qq / a has slope -sb sqrt(disc), c / qq has slope +sb sqrt(disc).
  if (sign == sb) return {qq == 0.0 ? 0.0 : c / qq, sign};
  return {qq / q.a, sign};
}

std::vector<std::vector<double>> channel_buffers(std::size_t p, const std::vector<SampledSignal>& disturbances,
                                                 std::size_t length) {
  std::vector<std::vector<double>> x(p, std::vector<double>(length, 0.0));
  for (std::size_t k = 1; k < p; ++k) {
    const auto v = disturbances[k - 1].values();
    for (std::size_t j = 0; j < length; ++j) x[k][j] = v.empty() ? 0.0 : v[std::min(j, v.size() - 1)];
  }
  return x;
}

void check_disturbances(std::size_t p, const std::vector<SampledSignal>& disturbances, const TimeGrid& grid,
                        const char* who) {
  if (disturbances.size() + 1 != p) {
    throw ConfigError(std::string(who) + ": expected " + std::to_string(p - 1) + " disturbance channels, got " +
                      std::to_string(disturbances.size()));
  }
  for (const auto& s : disturbances) {
    require_placement(s, Placement::midpoints, who);
    if (!(s.grid() == grid)) throw ConfigError(std::string(who) + ": disturbances must share the control grid");
  }
}

}  // namespace

void RegulationProblem::validate() const {
  model.validate();
  check_disturbances(model.p, disturbances, grid, "regulate");
  if (lookahead < 1) throw ConfigError("regulate: lookahead must be at least 1");
  if (!std::isfinite(setpoint)) throw ConfigError("regulate: setpoint must be finite");
}

RegulationResult regulate(const RegulationProblem& problem) {
  problem.validate();
  return regulate(problem, vector_weights(problem.model, problem.grid));
}

RegulationResult regulate(const RegulationProblem& problem, const VectorWeights& weights) {
  problem.validate();
  const auto& g = problem.grid;
  const std::size_t n = g.n();
  const std::size_t d = problem.lookahead;
  if (weights.grid.h() != g.h() || weights.grid.n() < n) throw ConfigError("regulate: weights do not cover the grid");
  auto x = channel_buffers(problem.model.p, problem.disturbances, n + 1);

  std::vector<double> y(n + 1, 0.0);
  std::optional<double> branch;
  for (std::size_t i = 1; i <= n; ++i) {
    {
      std::vector<std::span<const double>> xs(x.begin(), x.end());
      y[i] = vector_output_at(weights, xs, i);
    }
    if (i == n) break;
    const std::size_t m = std::min(i + d, n);
    const auto q = output_in_unknown(weights, x, m, m - i);
    const auto r = solve_root(q, problem.setpoint, branch, g.node(i), "regulate");
    for (std::size_t k = i + 1; k < m; ++k) x[0][k] = 0.0;
    x[0][i] = r.value;
    branch = r.branch;
  }
  x[0][n] = x[0][n - 1];

  std::vector<double> control(x[0].begin() + 1, x[0].begin() + static_cast<std::ptrdiff_t>(n + 1));
  std::vector<double> applied(x[0].begin(), x[0].begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<double> eps(n + 1), inc(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) eps[i] = problem.setpoint - y[i];
  for (std::size_t i = 1; i <= n; ++i) inc[i] = eps[i] - eps[i - 1];
  return RegulationResult{SampledSignal(g, Placement::midpoints, std::move(control)),
                          SampledSignal(g, Placement::midpoints, std::move(applied)),
                          SampledSignal(g, Placement::nodes, std::move(y)),
                          SampledSignal(g, Placement::nodes, std::move(eps)),
                          SampledSignal(g, Placement::nodes, std::move(inc))};
}

SampledSignal open_loop_solve(const VectorQuadraticModel& model, const std::vector<SampledSignal>& disturbances,
                              const SampledSignal& desired) {
  model.validate();
  require_placement(desired, Placement::nodes, "open_loop_solve desired output");
  const auto& g = desired.grid();
  check_disturbances(model.p, disturbances, g, "open_loop_solve");
  const auto w = vector_weights(model, g);
  const std::size_t n = g.n();
  auto x = channel_buffers(model.p, disturbances, n);

  std::optional<double> branch;
  for (std::size_t i = 1; i <= n; ++i) {
    const auto q = output_in_unknown(w, x, i, 1);
    const auto r = solve_root(q, desired[i], branch, g.node(i), "open_loop_solve");
    x[0][i - 1] = r.value;
    branch = r.branch;
  }
  return SampledSignal(g, Placement::midpoints, std::move(x[0]));
}

ThresholdResult controllability_threshold(const std::function<RegulationProblem(double)>& make, double lo,
                                          double hi, double rel_tol) {
  if (!(lo >= 0.0 && hi > lo) || !(rel_tol > 0.0)) {
    throw ConfigError("controllability_threshold: need 0 <= lo < hi and rel_tol > 0");
  }
  auto failure = [&](double a) -> std::optional<double> {
    try {
      regulate(make(a));
      return std::nullopt;
    } catch (const ExistenceError& e) {
      return e.at();
    }
  };
  auto at_hi = failure(hi);
  if (!at_hi) return {};
  if (auto at_lo = failure(lo)) return {true, lo, *at_lo};
  double t_fail = *at_hi;
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (auto f = failure(mid)) {
      hi = mid;
      t_fail = *f;
    } else {
      lo = mid;
    }
  }
  return {true, hi, t_fail};
}

}  // namespace volterra
