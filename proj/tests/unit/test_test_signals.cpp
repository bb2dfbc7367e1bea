#include <numeric>

#include "doctest.h"
#include "volterra/errors.hpp"
#include "volterra/test_signals.hpp"

using namespace volterra;

TEST_CASE("order-2 family") {
  TimeGrid g(0.1, 6);
  auto x = build_signal(TestFamilySpec{2, {1.0, -1.0}, {0.2}}, 0, g);
  const std::vector<double> expect{1, 1, 0, 0, 0, 0};
  CHECK(std::vector<double>(x.values().begin(), x.values().end()) == expect);
}

TEST_CASE("order-3 family") {
  TimeGrid g(0.1, 6);
  auto x = build_signal(TestFamilySpec{3, {1.0, 2.0, -3.0}, {0.1, 0.1}}, 0, g);
  const std::vector<double> expect{1, -1, 0, 0, 0, 0};
  CHECK(std::vector<double>(x.values().begin(), x.values().end()) == expect);

  auto y = build_signal(TestFamilySpec{3, {1.0, 2.0, -3.0}, {0.3, 0.2}}, 2, g);
  const double area = std::accumulate(y.values().begin(), y.values().end(), 0.0) * g.h();
  CHECK(area == doctest::Approx(-3.0 * (0.3 - 0.2)));
  // sign pattern (+, -, 0) scaled by alpha
  CHECK(y[0] == -3.0);
  CHECK(y[3] == 3.0);
  CHECK(y[5] == 0.0);
}

TEST_CASE("alignment and horizon errors") {
  TimeGrid g(0.1, 6);
  CHECK_THROWS_AS(build_signal(TestFamilySpec{2, {1.0, -1.0}, {0.15}}, 0, g), ConfigError);
  CHECK_THROWS_AS(build_signal(TestFamilySpec{3, {1.0, 2.0, -3.0}, {0.4, 0.3}}, 0, g), ConfigError);
  CHECK_THROWS_AS(build_signal(TestFamilySpec{2, {1.0, 1.0}, {0.1}}, 0, g), ConfigError);
  CHECK_THROWS_AS(build_signal(TestFamilySpec{2, {1.0, 0.0}, {0.1}}, 0, g), ConfigError);
  CHECK_THROWS_AS(build_signal(TestFamilySpec{2, {1.0, -1.0}, {0.1, 0.1}}, 0, g), ConfigError);
}

TEST_CASE("amplitude constraints") {
  CHECK(validate_amplitudes(TestFamilySpec{2, {0.7, -0.7}, {0.1}}).ok);
  CHECK(validate_amplitudes(TestFamilySpec{3, {0.475, 0.885, -1.36}, {0.1, 0.1}}).ok);
  auto pi = TestFamilySpec{2, {0.464, 0.928}, {0.1}};
  CHECK_FALSE(validate_amplitudes(pi).ok);
  CHECK(validate_amplitudes(pi, true).ok);
  auto bad3 = validate_amplitudes(TestFamilySpec{3, {1.0, 2.0, -2.5}, {0.1, 0.1}});
  CHECK_FALSE(bad3.ok);
  CHECK(bad3.message.find("alpha_3") != std::string::npos);
}

TEST_CASE("degenerate lattice members") {
  TimeGrid g(1.0, 5);
  const std::size_t widths[] = {2, 0};
  auto x = family_signal(2.0, widths, g);
  const std::vector<double> expect{2, 2, 0, 0, 0};
  CHECK(std::vector<double>(x.values().begin(), x.values().end()) == expect);
}
