#include "volterra/amplitude_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "volterra/errors.hpp"

namespace volterra {

double residual_3sq(double alpha, double beta, double T) {
  return (beta * beta * beta - alpha * alpha * beta) * T * T * T / 6.0;
}

double residual_3sq_pi(double a1, double a2, double beta, double T) {
  return (beta * beta * beta - (a1 + a2) * beta * beta + a1 * a2 * beta) * T * T * T / 6.0;
}

double residual_3sq_twostep(double alpha, double beta, double w1, double w2) {
  const double d = w2 - w1;
  return (beta * beta * beta - beta * alpha * alpha) * d * d * d / 6.0 - beta * alpha * alpha * w1 * w2 * w2;
}

double residual_4cub(double a1, double a2, double beta, double T) {
  const double b2 = beta * beta;
  const double poly = b2 * b2 + (a1 * a2 - (a1 * a1 + a1 * a2 + a2 * a2)) * b2 + a1 * a2 * (a1 + a2) * beta;
  return poly * std::pow(T, 4) / 24.0;
}

double residual_4cub_pi(double a1, double a2, double a3, double beta, double T) {
  const double s1 = a1 + a2 + a3;
  const double s2 = a1 * a2 + a1 * a3 + a2 * a3;
  const double s3 = a1 * a2 * a3;
  const double poly = ((beta - s1) * beta + s2) * beta * beta - s3 * beta;
  return poly * std::pow(T, 4) / 24.0;
}

double residual_stabilization(double alpha, double beta, double T, int N) {
  double sum = 0.0;
  double factorial = 2.0;
  for (int m = 3; m <= N; ++m) {
    factorial *= m;
    const int p = (m % 2 == 1) ? 1 : 2;
    sum += std::pow(T, m) / factorial * (std::pow(beta, m) - std::pow(beta, p) * std::pow(alpha, m - p));
  }
  return sum;
}

void MinimaxProblem::validate() const {
  if (!(B > 0.0) || !std::isfinite(B)) throw ConfigError("amplitude bound B must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("horizon T must be positive");
  if (free_amplitudes < 1 || free_amplitudes > 3) throw ConfigError("minimax supports 1..3 free amplitudes");
  if (!residual) throw ConfigError("minimax problem has no residual");
}

std::vector<double> MinimaxProblem::full_amplitudes(std::span<const double> free) const {
  std::vector<double> a(free.begin(), free.end());
  if (constraint == Constraint::sum_zero) a.push_back(-std::accumulate(free.begin(), free.end(), 0.0));
  return a;
}

namespace {

constexpr std::size_t beta_points = 2001;
constexpr double inv_phi = 0.6180339887498949;

// Maximises f on [a, b] by golden-section search.
template <typename F>
std::pair<double, double> golden_max(F&& f, double a, double b, double tol) {
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

InnerMax inner_max_beta(const MinimaxProblem& pr, std::span<const double> alpha) {
  auto g = [&](double beta) { return std::abs(pr.residual(alpha, beta, 0.0, 0.0)); };
  const double step = pr.B / static_cast<double>(beta_points - 1);
  std::vector<double> v(beta_points);
  for (std::size_t k = 0; k < beta_points; ++k) v[k] = g(static_cast<double>(k) * step);

  InnerMax out;
  std::vector<std::pair<double, double>> peaks;
  for (std::size_t k = 0; k < beta_points; ++k) {
    const bool left_ok = k == 0 || v[k] >= v[k - 1];
    const bool right_ok = k + 1 == beta_points || v[k] >= v[k + 1];
    if (!left_ok || !right_ok || v[k] == 0.0) continue;
    const double lo = k == 0 ? 0.0 : (k - 1) * step;
    const double hi = k + 1 == beta_points ? pr.B : (k + 1) * step;
    auto [x, fx] = golden_max(g, lo, hi, 1e-10 * pr.B);
    if (v[k] > fx) x = k * step, fx = v[k];
    peaks.emplace_back(x, fx);
  }
  for (const auto& [x, fx] : peaks) {
    if (fx > out.value) out.value = fx, out.beta = x;
  }
  for (const auto& [x, fx] : peaks) {
    if (fx >= out.value * (1.0 - 1e-3)) out.maximizers.push_back(x);
  }
  return out;
}

InnerMax inner_max_omegas(const MinimaxProblem& pr, std::span<const double> alpha) {
  auto g = [&](double beta, double w1, double w2) { return std::abs(pr.residual(alpha, beta, w1, w2)); };
  constexpr std::size_t nb = 201, nw = 101;
  const double db = pr.B / (nb - 1), dw = pr.T / (nw - 1);

  // Envelope over beta on the (w1, w2) triangle.
  std::vector<double> env(nw * nw, -1.0), arg(nw * nw, 0.0);
  for (std::size_t i = 0; i < nw; ++i)
    for (std::size_t j = 0; i + j < nw; ++j)
      for (std::size_t k = 0; k < nb; ++k) {
        const double val = g(k * db, i * dw, j * dw);
        if (val > env[i * nw + j]) env[i * nw + j] = val, arg[i * nw + j] = k * db;
      }
  double top = 0.0;
  for (double e : env) top = std::max(top, e);

  auto refine = [&](double b, double w1, double w2) {
    double value = g(b, w1, w2), span_b = db, span_w = dw;
    for (int sweep = 0; sweep < 8; ++sweep) {
      {
        auto [x, fx] = golden_max([&](double t) { return g(t, w1, w2); }, std::max(0.0, b - span_b),
                                  std::min(pr.B, b + span_b), 1e-12 * pr.B);
        if (fx > value) value = fx, b = x;
      }
      {
        const double hi = std::min(pr.T - w2, w1 + span_w);
        auto [x, fx] = golden_max([&](double t) { return g(b, t, w2); }, std::max(0.0, w1 - span_w), hi, 1e-12 * pr.T);
        if (fx > value) value = fx, w1 = x;
      }
      {
        const double hi = std::min(pr.T - w1, w2 + span_w);
        auto [x, fx] = golden_max([&](double t) { return g(b, w1, t); }, std::max(0.0, w2 - span_w), hi, 1e-12 * pr.T);
        if (fx > value) value = fx, w2 = x;
      }
      // Slide along the face w1 + w2 = T.
      if (w1 + w2 >= pr.T - span_w) {
        auto [x, fx] = golden_max([&](double t) { return g(b, t, pr.T - t); }, std::max(0.0, w1 - span_w),
                                  std::min(pr.T, w1 + span_w), 1e-12 * pr.T);
        if (fx > value) value = fx, w1 = x, w2 = pr.T - x;
      }
      span_b *= 0.5;
      span_w *= 0.5;
    }
    return InnerMax{value, b, w1, w2, {}, {}};
  };

  std::vector<InnerMax> peaks;
  for (std::size_t i = 0; i < nw; ++i)
    for (std::size_t j = 0; i + j < nw; ++j) {
      const double e = env[i * nw + j];
      if (e < 0.9 * top || e == 0.0) continue;
      bool local = true;
      for (int di = -1; di <= 1 && local; ++di)
        for (int dj = -1; dj <= 1 && local; ++dj) {
          const auto ii = static_cast<std::ptrdiff_t>(i) + di, jj = static_cast<std::ptrdiff_t>(j) + dj;
          if ((di == 0 && dj == 0) || ii < 0 || jj < 0 || ii + jj >= static_cast<std::ptrdiff_t>(nw)) continue;
          const double n = env[ii * nw + jj];
          // Ties broken towards the lexicographically first cell.
          if (n > e || (n == e && (ii < static_cast<std::ptrdiff_t>(i) || (ii == static_cast<std::ptrdiff_t>(i) && jj < static_cast<std::ptrdiff_t>(j)))))
            local = false;
        }
      if (local) peaks.push_back(refine(arg[i * nw + j], i * dw, j * dw));
    }

  InnerMax best;
  for (const auto& p : peaks)
    if (p.value > best.value) best = p;
  for (const auto& p : peaks)
    if (p.value >= best.value * (1.0 - 1e-3)) best.omega_maximizers.push_back({p.beta, p.w1, p.w2});
  return best;
}

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

InnerMax inner_max(const MinimaxProblem& problem, std::span<const double> alpha) {
  return problem.has_omegas ? inner_max_omegas(problem, alpha) : inner_max_beta(problem, alpha);
}

MinimaxResult solve_minimax(const MinimaxProblem& problem, double tol) {
  problem.validate();
  if (!(tol > 0.0)) throw ConfigError("minimax tolerance must be positive");
  const std::size_t d = problem.free_amplitudes;
  const double lo = problem.box == AmplitudeBox::positive ? 1e-9 * problem.B : -problem.B;
  const double hi = problem.B;
  std::size_t evaluations = 0;

  auto objective = [&](const std::vector<double>& free) {
    ++evaluations;
    const auto full = problem.full_amplitudes(free);
    return inner_max(problem, full).value;
  };

  struct Candidate {
    std::vector<double> x;
    double f;
  };
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.f != b.f) return a.f < b.f;
    return lex_less(a.x, b.x);
  };

  // Multistart grid.
  constexpr std::size_t per_dim = 21;
  std::vector<Candidate> starts;
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = lo + (hi - lo) * static_cast<double>(idx[k]) / (per_dim - 1);
    starts.push_back({x, objective(x)});
    std::size_t k = 0;
    while (k < d && ++idx[k] == per_dim) idx[k++] = 0;
    if (k == d) break;
  }
  std::sort(starts.begin(), starts.end(), better);

  // Pattern search over all 3^d - 1 directions from the best few starts.
  std::vector<std::vector<int>> dirs;
  std::vector<int> dir(d, -1);
  while (true) {
    if (std::any_of(dir.begin(), dir.end(), [](int v) { return v != 0; })) dirs.push_back(dir);
    std::size_t k = 0;
    while (k < d && ++dir[k] == 2) dir[k++] = -1;
    if (k == d) break;
  }

  const std::size_t refine = std::min<std::size_t>(5, starts.size());
  Candidate best = starts.front();
  for (std::size_t s = 0; s < refine; ++s) {
    Candidate cur = starts[s];
    double step = (hi - lo) / (per_dim - 1);
    int guard = 0;
    while (step >= tol * problem.B) {
      if (++guard > 100000) throw NumericalError("minimax pattern search did not converge");
      Candidate trial = cur;
      for (const auto& dv : dirs) {
        std::vector<double> x = cur.x;
        for (std::size_t k = 0; k < d; ++k) x[k] = std::clamp(x[k] + dv[k] * step, lo, hi);
        const Candidate c{x, objective(x)};
        if (better(c, trial)) trial = c;
      }
      if (trial.f < cur.f) {
        cur = trial;
      } else {
        step *= 0.5;
      }
    }
    if (better(cur, best)) best = cur;
  }

  MinimaxResult r;
  r.alpha = problem.full_amplitudes(best.x);
  r.worst = inner_max(problem, r.alpha);
  r.value = r.worst.value;
  r.evaluations = evaluations;
  return r;
}

MinimaxProblem problem_3sq(double B, double T) {
  MinimaxProblem p;
  p.name = "3sq";
  p.constraint = Constraint::sum_zero;
  p.B = B;
  p.T = T;
  p.residual = [T](std::span<const double> a, double beta, double, double) { return residual_3sq(a[0], beta, T); };
  return p;
}

MinimaxProblem problem_3sq_pi(double B, double T) {
  MinimaxProblem p;
  p.name = "3sq_pi";
  p.free_amplitudes = 2;
  p.B = B;
  p.T = T;
  p.residual = [T](std::span<const double> a, double beta, double, double) {
    return residual_3sq_pi(a[0], a[1], beta, T);
  };
  return p;
}

MinimaxProblem problem_3sq_pi_constrained(double B, double T) {
  MinimaxProblem p = problem_3sq_pi(B, T);
  p.name = "3sq_pi_sum_zero";
  p.free_amplitudes = 1;
  p.box = AmplitudeBox::symmetric;
  p.constraint = Constraint::sum_zero;
  return p;
}

MinimaxProblem problem_3sq_twostep(double B, double T) {
  MinimaxProblem p;
  p.name = "3sq_twostep";
  p.constraint = Constraint::sum_zero;
  p.B = B;
  p.T = T;
  p.has_omegas = true;
  p.residual = [](std::span<const double> a, double beta, double w1, double w2) {
    return residual_3sq_twostep(a[0], beta, w1, w2);
  };
  return p;
}

MinimaxProblem problem_4cub(double B, double T) {
  MinimaxProblem p;
  p.name = "4cub";
  p.free_amplitudes = 2;
  p.constraint = Constraint::sum_zero;
  p.B = B;
  p.T = T;
  p.residual = [T](std::span<const double> a, double beta, double, double) {
    return residual_4cub(a[0], a[1], beta, T);
  };
  return p;
}

MinimaxProblem problem_4cub_pi(double B, double T) {
  MinimaxProblem p;
  p.name = "4cub_pi";
  p.free_amplitudes = 3;
  p.B = B;
  p.T = T;
  p.residual = [T](std::span<const double> a, double beta, double, double) {
    return residual_4cub_pi(a[0], a[1], a[2], beta, T);
  };
  return p;
}

MinimaxProblem problem_stabilization(int N, double B, double T) {
  if (N < 3) throw ConfigError("stabilization probe needs N >= 3");
  MinimaxProblem p;
  p.name = "stabilization_N" + std::to_string(N);
  p.constraint = Constraint::sum_zero;
  p.B = B;
  p.T = T;
  p.residual = [T, N](std::span<const double> a, double beta, double, double) {
    return residual_stabilization(a[0], beta, T, N);
  };
  return p;
}

MinimaxProblem problem_by_name(const std::string& name, double B, double T) {
  if (name == "3sq") return problem_3sq(B, T);
  if (name == "3sq_pi") return problem_3sq_pi(B, T);
  if (name == "3sq_twostep") return problem_3sq_twostep(B, T);
  if (name == "4cub") return problem_4cub(B, T);
  if (name == "4cub_pi") return problem_4cub_pi(B, T);
  throw ConfigError("unknown minimax problem '" + name + "' (expected 3sq, 3sq_pi, 3sq_twostep, 4cub, 4cub_pi)");
}

std::vector<StabilizationRow> stabilization_probe(int n_min, int n_max, double B, double T) {
  if (n_min < 3 || n_max < n_min) throw ConfigError("stabilization probe range must satisfy 3 <= n_min <= n_max");
  std::vector<StabilizationRow> rows;
  for (int N = n_min; N <= n_max; ++N) {
    const auto r = solve_minimax(problem_stabilization(N, B, T));
    rows.push_back({N, r.alpha[0], r.value});
  }
  return rows;
}

}  // namespace volterra
