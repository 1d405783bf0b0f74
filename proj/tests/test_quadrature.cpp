#include <doctest.h>

#include <cmath>
#include <numbers>

#include "brw/error.hpp"
#include "brw/quadrature.hpp"
#include "oracles.hpp"

using namespace brw;

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  for (int n : {6, 8, 12, 16, 24, 32, 48, 64}) {
    const auto rule = gauss_legendre(n);
    REQUIRE(static_cast<int>(rule.size()) == n);
    double w = 0.0, x2 = 0.0, x_odd = 0.0;
    for (const auto& [x, wt] : rule) {
      w += wt;
      x2 += wt * x * x;
      x_odd += wt * x * x * x;
    }
    CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(std::abs(x_odd) < 1e-14);
  }
  CHECK(gauss_legendre(7).size() == 8u);
  CHECK_THROWS_AS(gauss_legendre(65), ValidationError);
}

TEST_CASE("sphere quadrature weights sum to the surface area") {
  const double pi = std::numbers::pi;
  for (int level = 0; level < 4; ++level) {
    const auto [d2, w2] = sphere_quadrature(2, level);
    double s2 = 0.0;
    for (double w : w2) s2 += w;
    CHECK(s2 == doctest::Approx(2.0 * pi));
    const auto [d3, w3] = sphere_quadrature(3, level);
    double s3 = 0.0, z2 = 0.0;
    for (std::size_t i = 0; i < w3.size(); ++i) {
      s3 += w3[i];
      z2 += w3[i] * d3[3 * i + 2] * d3[3 * i + 2];
    }
    CHECK(s3 == doctest::Approx(4.0 * pi));
    CHECK(z2 == doctest::Approx(4.0 * pi / 3.0));
  }
}

TEST_CASE("spectral rule reproduces the torus volume and smooth integrands") {
  for (int d : {1, 2, 3}) {
    SpectralIntegrator quad(build_nearest_neighbor_kernel(d));
    const auto one = quad.integrate_at(1, 0, [](auto, double) { return 1.0; });
    CHECK(one.value == doctest::Approx(1.0).epsilon(1e-10));
    // (2pi)^{-d} int e^{phi t} = (e^{-t/d} I_0(t/d))^d
    const double t = 2.0;
    const auto p = quad.integrate([t](auto, double phi) { return std::exp(phi * t); });
    CHECK(p.value == doctest::Approx(std::pow(oracle::scaled_bessel(0, t / d), d)).epsilon(1e-7));
  }
}

TEST_CASE("nodes are sorted outward by phi") {
  SpectralIntegrator quad(build_nearest_neighbor_kernel(2));
  const auto rule = quad.rule(0);
  for (std::size_t i = 1; i < rule->size(); ++i) REQUIRE(rule->phi(i) <= rule->phi(i - 1));
  CHECK(rule->count_above(-1.0) < rule->size());
  CHECK(rule->count_above(-100.0) == rule->size());
}

TEST_CASE("singular integrands") {
  // d = 3: 1/(-phi) is integrable, the Watson integral.
  SpectralIntegrator q3(build_nearest_neighbor_kernel(3));
  const auto g = q3.integrate([](auto, double phi) { return 1.0 / -phi; });
  CHECK_FALSE(g.divergent);
  CHECK(g.value == doctest::Approx(oracle::watson_g0()).epsilon(1e-6));
  // d = 1: 1/(-phi) diverges at the origin.
  SpectralIntegrator q1(build_nearest_neighbor_kernel(1));
  const auto r = q1.integrate([](auto, double phi) { return 1.0 / -phi; });
  CHECK(r.divergent);
}

TEST_CASE("oscillating integrands pick up the displacement frequency") {
  SpectralIntegrator quad(build_nearest_neighbor_kernel(1), {.rel_tol = 1e-10});
  const int x = 12;
  const double t = 3.0;
  const auto r = quad.integrate(
      [&](std::span<const double> th, double phi) { return std::cos(th[0] * x) * std::exp(phi * t); },
      displacement_frequency({x}));
  CHECK(r.value == doctest::Approx(oracle::scaled_bessel(x, t)).epsilon(1e-8));
  CHECK(displacement_frequency({3, 4}) == 5);
  CHECK(displacement_frequency({1, 1}) == 2);
}

TEST_CASE("non-convergence raises with the last estimate") {
  QuadratureOptions o;
  o.rel_tol = 1e-15;
  o.max_level = 1;
  SpectralIntegrator quad(build_nearest_neighbor_kernel(3), o);
  try {
    quad.integrate([](auto, double phi) { return 1.0 / -phi; });
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.partial_value() == doctest::Approx(oracle::watson_g0()).epsilon(1e-5));
  }
}
