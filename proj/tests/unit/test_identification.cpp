#include <cmath>

#include "doctest.h"
#include "volterra/errors.hpp"
#include "volterra/identification.hpp"
#include "volterra/reference_models.hpp"
#include "volterra/test_signals.hpp"

using namespace volterra;

namespace {

ScalarSystem reference(int order) {
  return [order](const SampledSignal& x) { return ref_response(RefModel::truncated(order), x); };
}

ScalarSystem model_system(const VolterraModel& m) {
  return [m](const SampledSignal& x) { return simulate(m, x); };
}

// Window integral of e^{-s} over lags [lo, hi].
double expo(double lo, double hi) { return std::exp(-lo) - std::exp(-hi); }

// Exact components of K2 = e^{-s1-s2} and K3 = e^{-s1-s2-s3} on the lattice.
Lattice2 product_f2(const TimeGrid& g) {
  Lattice2 f(g.n());
  for (std::size_t i = 1; i <= g.n(); ++i)
    for (std::size_t l = 1; l <= i; ++l) {
      const double a = expo(g.node(i - l), g.node(i));
      f(i, l) = a * a;
    }
  return f;
}

Lattice3 product_f3(const TimeGrid& g) {
  Lattice3 f(g.n());
  for (std::size_t i = 1; i <= g.n(); ++i)
    for (std::size_t l1 = 1; l1 <= i; ++l1)
      for (std::size_t l2 = 0; l1 + l2 <= i; ++l2) {
        const double plus = expo(g.node(i - l1), g.node(i));
        const double minus = expo(g.node(i - l1 - l2), g.node(i - l1));
        f(i, l1, l2) = std::pow(plus - minus, 3);
      }
  return f;
}

}  // namespace

TEST_CASE("lattice indexing is dense and unique") {
  Lattice3 t(6);
  std::size_t count = 0;
  for (std::size_t i = 1; i <= 6; ++i)
    for (std::size_t l1 = 1; l1 <= i; ++l1)
      for (std::size_t l2 = 0; l1 + l2 <= i; ++l2) t(i, l1, l2) = static_cast<double>(++count);
  CHECK(count == t.raw().size());
  for (std::size_t k = 0; k < count; ++k) CHECK(t.raw()[k] == static_cast<double>(k + 1));
}

TEST_CASE("component extraction") {
  SUBCASE("parity split for (a, -a)") {
    const double a = 0.7, yp = 1.3, ym = -0.2;
    const double amps[] = {a, -a};
    const double ys[] = {yp, ym};
    auto f = extract_point(amps, ys);
    CHECK(f[0] == doctest::Approx((yp - ym) / (2 * a)).epsilon(1e-15));
    CHECK(f[1] == doctest::Approx((yp + ym) / (2 * a * a)).epsilon(1e-15));
  }
  SUBCASE("planted components, amplitudes (1, 2, -3)") {
    const double amps[] = {1.0, 2.0, -3.0};
    double ys[3];
    for (int k = 0; k < 3; ++k) ys[k] = 1 * amps[k] + 2 * amps[k] * amps[k] + 3 * std::pow(amps[k], 3);
    auto f = extract_point(amps, ys);
    CHECK(std::abs(f[0] - 1) < 1e-12);
    CHECK(std::abs(f[1] - 2) < 1e-12);
    CHECK(std::abs(f[2] - 3) < 1e-12);
  }
  SUBCASE("exactly quadratic system reproduces its components") {
    TimeGrid g(0.1, 10);
    auto t = collect_responses2(reference(2), g, {0.5, -0.5});
    auto f = extract_components(t);
    for (std::size_t i = 1; i <= g.n(); ++i)
      for (std::size_t l = 1; l <= i; ++l) {
        const double w = g.node(l);
        CHECK(std::abs(f[0].at(i, l) - w) < 1e-13);
        CHECK(std::abs(f[1].at(i, l) - w * w / 2) < 1e-13);
      }
  }
  SUBCASE("duplicate amplitudes are rejected") {
    const double amps[] = {1.0, 1.0};
    const double ys[] = {0.0, 0.0};
    CHECK_THROWS_AS(extract_point(amps, ys), ConfigError);
  }
}

TEST_CASE("invert K1") {
  TimeGrid g(0.05, 40);
  SUBCASE("reference model N = 1") {
    auto y = ref_response(RefModel::truncated(1), SampledSignal(g, Placement::midpoints, std::vector<double>(40, 1.0)));
    for (double v : invert_k1(y, 1.0).cell_values(g)) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("exponential step response is second order") {
    auto err = [](std::size_t n) {
      TimeGrid gg(2.0 / n, n);
      auto y = sample_nodes(gg, [](double t) { return 0.4 * (1 - std::exp(-t)); });
      auto k = invert_k1(y, 0.4).cell_values(gg);
      double e = 0;
      for (std::size_t j = 1; j <= n; ++j) e = std::max(e, std::abs(k[j - 1] - std::exp(-gg.midpoint(j))));
      return e;
    };
    CHECK(std::log2(err(20) / err(40)) == doctest::Approx(2.0).epsilon(0.05));
  }
  SUBCASE("zero response") {
    for (double v : invert_k1(SampledSignal::zeros(g, Placement::nodes), 2.0).cell_values(g)) CHECK(v == 0.0);
  }
  CHECK_THROWS_AS(invert_k1(SampledSignal::zeros(g, Placement::nodes), 0.0), ConfigError);
}

TEST_CASE("invert K2") {
  SUBCASE("formula on the closed-form reference component") {
    auto f2 = [](double t, double w) { return std::pow(std::min(t, w), 2) / 2; };
    CHECK(k2_from_derivatives(f2, 1.0, 0.4, 1e-3) == doctest::Approx(0.5).epsilon(1e-9));
    auto fp = [](double t, double w) { return std::pow(std::exp(-(t - w)) - std::exp(-t), 2); };
    CHECK(k2_from_derivatives(fp, 1.0, 0.4, 1e-4) == doctest::Approx(std::exp(-1.0 - 0.6)).epsilon(1e-6));
  }
  SUBCASE("reference model N = 2 gives 1/2") {
    TimeGrid g(0.1, 12);
    auto m = identify_quadratic(collect_responses2(reference(2), g, {1.0, -1.0}));
    auto k2 = m.k2->cell_values(g);
    for (double v : k2.raw()) CHECK(v == doctest::Approx(0.5).epsilon(1e-10));
    for (double v : m.k1->cell_values(g)) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("zero component") {
    TimeGrid g(0.1, 5);
    for (double v : invert_k2(Lattice2(5), g).cell_values(g).raw()) CHECK(v == 0.0);
  }
  SUBCASE("planted s1 + s2 through midpoint simulation") {
    TimeGrid g(0.1, 10);
    auto planted = VolterraModel::quadratic(Kernel1::analytic([](double) { return 0.0; }),
                                            Kernel2::analytic([](double a, double b) { return a + b; }));
    auto m = identify_quadratic(collect_responses2(model_system(planted), g, {0.5, -0.5}));
    auto k2 = m.k2->cell_values(g);
    for (std::size_t a = 1; a <= g.n(); ++a)
      for (std::size_t b = 1; b <= a; ++b) CHECK(std::abs(k2(a, b) - g.midpoint(a) - g.midpoint(b)) < 1e-10);
  }
  SUBCASE("exact product-kernel components: order >= 1 under halving") {
    auto err = [](std::size_t n) {
      TimeGrid g(2.0 / n, n);
      auto k = invert_k2(product_f2(g), g).cell_values(g);
      double e = 0;
      for (std::size_t a = 1; a <= n; ++a)
        for (std::size_t b = 1; b <= a; ++b)
          e = std::max(e, std::abs(k(a, b) - std::exp(-g.midpoint(a) - g.midpoint(b))));
      return e;
    };
    const double e1 = err(16), e2 = err(32);
    CHECK(e2 < 1e-2);
    CHECK(std::log2(e1 / e2) >= 1.0);
  }
  CHECK_THROWS_AS(invert_k2(Lattice2(2), TimeGrid(0.1, 2)), ConfigError);
  CHECK_THROWS_AS(identify_quadratic(collect_responses2(reference(2), TimeGrid(0.1, 4), {0.5, 1.0})), ConfigError);
}

TEST_CASE("invert K3") {
  SUBCASE("formula on the closed-form reference component") {
    // f3 = (w1 - w2)^3 / 6 once t > w1 + w2; the compact sign is -1/12.
    auto f3 = [](double, double w1, double w2) { return std::pow(w1 - w2, 3) / 6; };
    CHECK(k3_from_derivatives(f3, 2.0, 0.5, 0.3, 1e-2) == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    auto fp = [](double t, double w1, double w2) {
      const double plus = std::exp(-(t - w1)) - std::exp(-t);
      const double minus = std::exp(-(t - w1 - w2)) - std::exp(-(t - w1));
      return std::pow(plus - minus, 3);
    };
    CHECK(k3_from_derivatives(fp, 1.5, 0.4, 0.3, 1e-3) ==
          doctest::Approx(std::exp(-1.5 - 1.1 - 0.8)).epsilon(1e-4));
    CHECK(k3_compact(fp, 1.5, 1.1, 0.8, 1e-3) == doctest::Approx(std::exp(-1.5 - 1.1 - 0.8)).epsilon(1e-4));
    CHECK(k3_compact(f3, 2.0, 1.5, 1.2, 1e-2) == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
  }
  SUBCASE("reference model N = 3 gives 1/6") {
    TimeGrid g(0.1, 10);
    auto m = identify_cubic(collect_responses3(reference(3), g, {0.5, 1.0, -1.5}));
    for (double v : m.k3->cell_values(g).raw()) CHECK(v == doctest::Approx(1.0 / 6.0).epsilon(1e-8));
    for (double v : m.k2->cell_values(g).raw()) CHECK(v == doctest::Approx(0.5).epsilon(1e-9));
    for (double v : m.k1->cell_values(g)) CHECK(v == doctest::Approx(1.0).epsilon(1e-11));
  }
  SUBCASE("zero component") {
    TimeGrid g(0.1, 5);
    for (double v : invert_k3(Lattice3(5), g).cell_values(g).raw()) CHECK(v == 0.0);
  }
  SUBCASE("planted constant K3") {
    TimeGrid g(0.1, 8);
    auto planted = VolterraModel::cubic(Kernel1::analytic([](double) { return 0.3; }),
                                        Kernel2::analytic([](double, double) { return -0.2; }),
                                        Kernel3::analytic([](double, double, double) { return 0.75; }));
    auto m = identify_cubic(collect_responses3(model_system(planted), g, {1.0, 2.0, -3.0}));
    for (double v : m.k3->cell_values(g).raw()) CHECK(v == doctest::Approx(0.75).epsilon(1e-8));
  }
  SUBCASE("planted non-symmetric-looking product kernel") {
    TimeGrid g(0.1, 8);
    auto k3 = Kernel3::analytic([](double a, double b, double c) { return a * b * c + a * a + b * b + c * c; });
    auto planted = VolterraModel::cubic(Kernel1::analytic([](double) { return 0.0; }),
                                        Kernel2::analytic([](double, double) { return 0.0; }), k3);
    auto m = identify_cubic(collect_responses3(model_system(planted), g, {1.0, 2.0, -3.0}));
    auto got = m.k3->cell_values(g);
    auto want = k3.cell_values(g);
    for (std::size_t k = 0; k < got.raw().size(); ++k) CHECK(std::abs(got.raw()[k] - want.raw()[k]) < 1e-8);
  }
  SUBCASE("exact product-kernel components: order >= 1 under halving") {
    auto err = [](std::size_t n) {
      TimeGrid g(1.0 / n, n);
      auto k = invert_k3(product_f3(g), g).cell_values(g);
      double e = 0;
      for (std::size_t a = 1; a <= n; ++a)
        for (std::size_t b = 1; b <= a; ++b)
          for (std::size_t c = 1; c <= b; ++c)
            e = std::max(e, std::abs(k(a, b, c) - std::exp(-g.midpoint(a) - g.midpoint(b) - g.midpoint(c))));
      return e;
    };
    const double e1 = err(8), e2 = err(16);
    CHECK(e2 < 1e-2);
    CHECK(std::log2(e1 / e2) >= 1.0);
  }
  CHECK_THROWS_AS(invert_k3(Lattice3(3), TimeGrid(0.1, 3)), ConfigError);
}

TEST_CASE("product-integration quadratic identification") {
  TimeGrid g(0.1, 12);
  SUBCASE("planted m = 1, l = 0") {
    PiWeights w(g);
    std::fill(w.m.begin(), w.m.end(), 1.0);
    auto got = identify_pi_quadratic(
        collect_responses2(model_system(VolterraModel::product_integration(w, 2)), g, {0.464, 0.928}));
    for (double v : got.m) CHECK(std::abs(v - 1.0) < 1e-12);
    for (double v : got.l.raw()) CHECK(std::abs(v) < 1e-12);
  }
  SUBCASE("planted constant K2 = 1/2") {
    auto w = constant_kernel_weights(g, 1.0, 0.5);
    auto got = identify_pi_quadratic(
        collect_responses2(model_system(VolterraModel::product_integration(w, 2)), g, {0.464, 0.928}));
    for (double v : got.l.raw()) CHECK(std::abs(v - g.h() * g.h() / 2) < 1e-12);
  }
  SUBCASE("zero responses") {
    ResponseTable2 t{g, {0.3, 0.9}, {Lattice2(g.n()), Lattice2(g.n())}};
    auto got = identify_pi_quadratic(t);
    for (double v : got.m) CHECK(v == 0.0);
    for (double v : got.l.raw()) CHECK(v == 0.0);
  }
  SUBCASE("inconsistent table") {
    ResponseTable2 t{g, {0.3, 0.9}, {Lattice2(g.n())}};
    CHECK_THROWS_AS(identify_pi_quadratic(t), ConfigError);
  }
}

TEST_CASE("product-integration cubic identification") {
  TimeGrid g(0.1, 9);
  SUBCASE("planted c = h^3/6") {
    auto w = constant_kernel_weights(g, 1.0, 0.5, 1.0 / 6.0);
    auto got = identify_pi_cubic(
        collect_responses3(model_system(VolterraModel::product_integration(w, 3)), g, {0.283, 0.677, 0.960}));
    const double h3 = std::pow(g.h(), 3);
    for (double v : got.c->raw()) CHECK(std::abs(v - h3 / 6) < 1e-10);
  }
  SUBCASE("zero responses") {
    ResponseTable3 t{g, {0.3, 0.6, 0.9}, {Lattice3(g.n()), Lattice3(g.n()), Lattice3(g.n())}};
    auto got = identify_pi_cubic(t);
    for (double v : got.c->raw()) CHECK(v == 0.0);
  }
  SUBCASE("round trip on a product kernel with a fresh validation signal") {
    auto truth = VolterraModel::cubic(Kernel1::analytic([](double s) { return std::exp(-s); }),
                                      Kernel2::analytic([](double a, double b) { return a * b; }),
                                      Kernel3::analytic([](double a, double b, double c) { return a * b * c; }));
    auto got = identify_pi_cubic(collect_responses3(model_system(truth), g, {0.283, 0.677, 0.960}));
    auto x = sample_midpoints(g, [](double t) { return std::sin(5 * t) + 0.3; });
    auto y_true = simulate(truth, x);
    auto y_id = simulate(VolterraModel::product_integration(got, 3), x);
    for (std::size_t i = 0; i <= g.n(); ++i) CHECK(std::abs(y_true[i] - y_id[i]) < 1e-8);
  }
}

TEST_CASE("vector quadratic identification") {
  TimeGrid g(0.1, 10);
  auto plant_with = [&](std::optional<CrossKernel> cross) {
    VectorQuadraticModel vm;
    vm.p = 2;
    vm.linear = {Kernel1::analytic([](double s) { return std::exp(-s); }),
                 Kernel1::analytic([](double s) { return 1 + s; })};
    vm.quadratic = {Kernel2::analytic([](double a, double b) { return a * b; }),
                    Kernel2::analytic([](double, double) { return -0.3; })};
    if (cross) vm.cross.emplace(std::pair<std::size_t, std::size_t>{0, 1}, *cross);
    return vm;
  };
  const std::vector<std::vector<double>> amps{{0.5, -0.5}, {0.25, -0.25}};

  SUBCASE("decoupled system") {
    auto vm = plant_with(std::nullopt);
    auto id = identify_vector_quadratic([&](std::span<const SampledSignal> x) { return simulate_vector(vm, x); }, g, 2,
                                        amps);
    auto k = id.cross.at({0, 1}).cell_values(g);
    for (std::size_t a = 1; a <= g.n(); ++a)
      for (std::size_t b = 1; b <= g.n(); ++b) CHECK(std::abs(k(a, b)) < 1e-9);
  }
  SUBCASE("planted unit and asymmetric cross kernels") {
    for (auto fn : {CrossKernel::Fn([](double, double) { return 1.0; }),
                    CrossKernel::Fn([](double a, double b) { return a - 2 * b; })}) {
      auto vm = plant_with(CrossKernel::analytic(fn));
      auto id = identify_vector_quadratic([&](std::span<const SampledSignal> x) { return simulate_vector(vm, x); }, g,
                                          2, amps);
      auto k = id.cross.at({0, 1}).cell_values(g);
      for (std::size_t a = 1; a <= g.n(); ++a)
        for (std::size_t b = 1; b <= g.n(); ++b) CHECK(std::abs(k(a, b) - fn(g.midpoint(a), g.midpoint(b))) < 1e-8);
      auto k1 = id.linear[1].cell_values(g);
      for (std::size_t j = 1; j <= g.n(); ++j) CHECK(std::abs(k1[j - 1] - (1 + g.midpoint(j))) < 1e-10);
    }
  }
  SUBCASE("heat-exchanger surrogate at 25% amplitudes") {
    HeatExchangerParams p;
    TimeGrid gh(30.0 / 60, 60);
    VectorSystem plant = [&](std::span<const SampledSignal> x) { return hx_response(p, x[0], x[1]); };
    auto id = identify_vector_quadratic(plant, gh, 2, {{0.25 * p.D0, -0.25 * p.D0}, {0.25 * p.Q0, -0.25 * p.Q0}});
    const SampledSignal xs[] = {
        sample_midpoints(gh, [&](double t) { return -0.15 * p.D0 * (t > 3 ? 1.0 : 0.0); }),
        sample_midpoints(gh, [&](double t) { return 0.2 * p.Q0 * std::sin(0.2 * t); })};
    auto y_plant = hx_response(p, xs[0], xs[1]);
    auto y_model = simulate_vector(id, xs);
    double err = 0, peak = 0;
    for (std::size_t i = 0; i <= gh.n(); ++i) {
      err = std::max(err, std::abs(y_plant[i] - y_model[i]));
      peak = std::max(peak, std::abs(y_plant[i]));
    }
    MESSAGE("surrogate error ", err, " of peak ", peak);
    CHECK(err <= 0.05 * peak);
  }
}
