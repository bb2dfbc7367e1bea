#include <cmath>
#include <numbers>

#include "doctest.h"
#include "volterra/errors.hpp"
#include "volterra/lambert.hpp"
#include "volterra/reference_models.hpp"

using namespace volterra;

namespace {
SampledSignal constant(const TimeGrid& g, double v) {
  return SampledSignal(g, Placement::midpoints, std::vector<double>(g.n(), v));
}
}  // namespace

TEST_CASE("reference response") {
  TimeGrid g(0.01, 100);
  SUBCASE("zero input") {
    auto y = ref_response(RefModel::infinite(), constant(g, 0.0));
    for (double v : y.values()) CHECK(v == 0.0);
  }
  SUBCASE("step input, infinite series") {
    auto y = ref_response(RefModel::infinite(), constant(g, 0.7));
    for (std::size_t i = 0; i <= g.n(); ++i) CHECK(y[i] == doctest::Approx(std::expm1(0.7 * g.node(i))).epsilon(1e-13));
  }
  SUBCASE("step input, N = 1") {
    auto y = ref_response(RefModel::truncated(1), constant(g, 0.7));
    for (std::size_t i = 0; i <= g.n(); ++i) CHECK(y[i] == doctest::Approx(0.7 * g.node(i)).epsilon(1e-13));
  }
  SUBCASE("truncation remainder bound") {
    auto x = sample_midpoints(g, [](double t) { return 1.5 * std::cos(t); });
    auto full = ref_response(RefModel::infinite(), x);
    auto th = cumulative_integral(x);
    for (int n = 1; n <= 6; ++n) {
      auto part = ref_response(RefModel::truncated(n), x);
      for (std::size_t i = 0; i <= g.n(); ++i) {
        const double a = std::abs(th[i]);
        const double bound = std::pow(a, n + 1) * std::exp(a) / std::tgamma(n + 2.0);
        CHECK(std::abs(full[i] - part[i]) <= bound * (1 + 1e-12) + 1e-15);
      }
    }
  }
  CHECK_THROWS_AS(RefModel::truncated(0), ConfigError);
}

TEST_CASE("reference inverse") {
  TimeGrid g(0.01, 100);
  SUBCASE("y = t") {
    auto x = ref_inverse(AnalyticSignal{[](double t) { return t; }, [](double) { return 1.0; }}, g);
    for (std::size_t i = 0; i <= g.n(); ++i) CHECK(x[i] == doctest::Approx(1.0 / (1.0 + g.node(i))).epsilon(1e-14));
    auto xg = ref_inverse(sample_nodes(g, [](double t) { return t; }));
    for (std::size_t i = 0; i <= g.n(); ++i) CHECK(xg[i] == doctest::Approx(1.0 / (1.0 + g.node(i))).epsilon(1e-12));
  }
  SUBCASE("y = -t with T >= 1 loses continuity") {
    TimeGrid g2(0.01, 150);
    try {
      ref_inverse(AnalyticSignal{[](double t) { return -t; }, [](double) { return -1.0; }}, g2);
      FAIL("expected existence error");
    } catch (const ExistenceError& e) {
      CHECK(e.at() == doctest::Approx(1.0));
    }
  }
  SUBCASE("exponential recovers constant") {
    auto x = ref_inverse(AnalyticSignal{[](double t) { return std::expm1(0.3 * t); },
                                        [](double t) { return 0.3 * std::exp(0.3 * t); }},
                         g);
    for (double v : x.values()) CHECK(v == doctest::Approx(0.3).epsilon(1e-13));
  }
  SUBCASE("composition with the response is second order") {
    auto err = [](std::size_t n) {
      TimeGrid gg(1.0 / n, n);
      auto x = sample_midpoints(gg, [](double t) { return std::sin(2 * t); });
      auto back = ref_inverse(ref_response(RefModel::infinite(), x));
      double e = 0;
      for (std::size_t i = 0; i <= n; ++i) e = std::max(e, std::abs(back[i] - std::sin(2 * gg.node(i))));
      return e;
    };
    CHECK(std::log2(err(100) / err(200)) > 1.8);
  }
}

TEST_CASE("factored model") {
  TimeGrid g(0.01, 100);
  SUBCASE("y = t e^t gives x = 1") {
    auto x = factored_inverse(AnalyticSignal{[](double t) { return t * std::exp(t); },
                                             [](double t) { return (1 + t) * std::exp(t); }},
                              g);
    CHECK(x[0] == 1.0);
    for (double v : x.values()) CHECK(std::abs(v - 1.0) < 1e-8);
  }
  SUBCASE("x(0) = y'(0)") {
    auto x = factored_inverse(AnalyticSignal{[](double t) { return std::sin(t); }, [](double t) { return std::cos(t); }},
                              g);
    CHECK(x[0] == doctest::Approx(1.0));
  }
  SUBCASE("round trip") {
    auto x = sample_midpoints(g, [](double t) { return 0.5 + 0.3 * t; });
    auto y = factored_response(x);
    auto back = factored_inverse(y);
    for (std::size_t i = 0; i <= g.n(); ++i) CHECK(std::abs(back[i] - (0.5 + 0.3 * g.node(i))) < 1e-4);
  }
  SUBCASE("below -1/e loses continuity") {
    CHECK_THROWS_AS(factored_inverse(AnalyticSignal{[](double t) { return -t; }, [](double) { return -1.0; }}, g),
                    ExistenceError);
  }
  CHECK(lambert_ratio(0.0) == 1.0);
  CHECK(lambert_ratio(1e-4) == doctest::Approx(lambert::w(lambert::Branch::principal, 1e-4) / 1e-4).epsilon(1e-14));
}

TEST_CASE("heat exchanger plant") {
  HeatExchangerParams p;
  TimeGrid g(0.1, 300);
  SUBCASE("zero input") {
    auto y = hx_response(p, constant(g, 0.0), constant(g, 0.0));
    for (double v : y.values()) CHECK(v == 0.0);
  }
  SUBCASE("constant heat matches closed form") {
    auto y = hx_response(p, constant(g, 0.0), constant(g, 20.0));
    double err = 0.0, peak = 0.0;
    for (std::size_t i = 0; i <= g.n(); ++i) {
      const double ref = hx_constant_heat_response(p, 20.0, g.node(i));
      err = std::max(err, std::abs(y[i] - ref));
      peak = std::max(peak, std::abs(ref));
    }
    CHECK(err <= 1e-3 * peak);
    // pointwise beyond the first second, where the response is no longer O(t^2)
    for (std::size_t i = 10; i <= g.n(); ++i) {
      const double ref = hx_constant_heat_response(p, 20.0, g.node(i));
      CHECK(std::abs(y[i] - ref) <= 1e-3 * std::abs(ref));
    }
  }
  SUBCASE("small-signal linearity") {
    auto dd = sample_midpoints(g, [](double t) { return 0.02 * std::sin(0.3 * t); });
    auto dq = sample_midpoints(g, [](double t) { return 10.0 * (t < 10 ? 1.0 : 0.0); });
    auto scaled = [&](double e) {
      std::vector<double> a(g.n()), b(g.n());
      for (std::size_t i = 0; i < g.n(); ++i) a[i] = e * dd[i], b[i] = e * dq[i];
      auto y = hx_response(p, SampledSignal(g, Placement::midpoints, a), SampledSignal(g, Placement::midpoints, b));
      return y[g.n() / 2] / e;
    };
    const double r1 = scaled(0.1), r2 = scaled(0.05), r3 = scaled(0.025);
    CHECK(r1 / r2 == doctest::Approx(1.0).epsilon(0.02));
    CHECK((r1 - r2) / (r2 - r3) == doctest::Approx(2.0).epsilon(0.02));
  }
  SUBCASE("causality") {
    auto dq = sample_midpoints(g, [](double t) { return std::cos(t); });
    std::vector<double> cut(dq.values().begin(), dq.values().end());
    for (std::size_t i = 100; i < cut.size(); ++i) cut[i] = 0.0;
    auto a = hx_response(p, constant(g, 0.0), dq);
    auto b = hx_response(p, constant(g, 0.0), SampledSignal(g, Placement::midpoints, cut));
    for (std::size_t i = 0; i <= 100; ++i) CHECK(a[i] == b[i]);
  }
  SUBCASE("parameter errors") {
    HeatExchangerParams bad = p;
    bad.lambda2 = bad.lambda1;
    CHECK_THROWS_AS(hx_response(bad, constant(g, 0.0), constant(g, 0.0)), ConfigError);
    CHECK_THROWS_AS(hx_response(p, constant(g, -0.2), constant(g, 0.0)), ExistenceError);
  }
}
