#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "brw/error.hpp"
#include "brw/transition.hpp"
#include "oracles.hpp"

using namespace brw;

TEST_CASE("transition probability of the simple walk") {
  const SpectralIntegrator quad(build_nearest_neighbor_kernel(1), {.rel_tol = 1e-10});
  CHECK(transition_probability(quad, 0.0, {3}, {3}).value == 1.0);
  CHECK(transition_probability(quad, 0.0, {3}, {2}).value == 0.0);
  for (double t : {0.5, 1.0, 5.0, 20.0}) {
    for (int x : {0, 1, 4}) {
      CAPTURE(t);
      CAPTURE(x);
      const double v = transition_probability(quad, t, {x}, {0}).value;
      CHECK(v == doctest::Approx(oracle::scaled_bessel(x, t)).epsilon(1e-8));
    }
  }
  CHECK(transition_probability(quad, 1.0, {0}, {0}).value == doctest::Approx(0.465759607593641).epsilon(1e-10));
}

TEST_CASE("only y - x enters") {
  const SpectralIntegrator quad(build_nearest_neighbor_kernel(2));
  const double a = transition_probability(quad, 1.3, {2, -1}, {0, 1}).value;
  const double b = transition_probability(quad, 1.3, {0, 1}, {2, -1}).value;
  const double c = transition_probability(quad, 1.3, {0, 0}, {-2, 2}).value;
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("normalization and Chapman-Kolmogorov in d = 1") {
  const SpectralIntegrator quad(build_nearest_neighbor_kernel(1), {.rel_tol = 1e-10});
  double mass = 0.0;
  for (int y = -12; y <= 12; ++y) mass += transition_probability(quad, 1.0, {0}, {y}).value;
  CHECK(std::abs(1.0 - mass) < 1e-4);

  double ck = 0.0;
  for (int y = -12; y <= 12; ++y) {
    ck += transition_probability(quad, 0.5, {0}, {y}).value * transition_probability(quad, 0.5, {y}, {0}).value;
  }
  CHECK(ck == doctest::Approx(transition_probability(quad, 1.0, {0}, {0}).value).epsilon(1e-8));
}

TEST_CASE("transition delta") {
  const SpectralIntegrator quad(build_nearest_neighbor_kernel(1), {.rel_tol = 1e-10});
  CHECK(transition_delta(quad, 1.0, {0}).value == 0.0);
  const double ref = oracle::scaled_bessel(0, 1.0) - oracle::scaled_bessel(1, 1.0);
  CHECK(ref == doctest::Approx(0.2578492).epsilon(1e-6));
  CHECK(transition_delta(quad, 1.0, {1}).value == doctest::Approx(ref).epsilon(1e-9));
  const double diff = transition_probability(quad, 1.0, {0}, {0}).value - transition_probability(quad, 1.0, {1}, {0}).value;
  CHECK(transition_delta(quad, 1.0, {1}).value == doctest::Approx(diff).epsilon(1e-8));

  const SpectralIntegrator heavy(build_heavy_tail_kernel(1, 1.2, DirectionFunction::constant(1.0), 16, 1.0));
  for (double t : {0.1, 1.0, 10.0, 100.0}) {
    for (int x : {1, 3, 10}) CHECK(transition_delta(heavy, t, {x}).value >= 0.0);
  }
}

TEST_CASE("Green function values") {
  const SpectralIntegrator q1(build_nearest_neighbor_kernel(1), {.rel_tol = 1e-10});
  CHECK(green_function(q1, 1.0, {0}, {0}).value == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
  for (double lam : {0.05, 0.5, 2.0}) {
    CHECK(green_function(q1, lam, {0}, {0}).value == doctest::Approx(oracle::simple_walk_green(lam)).epsilon(1e-8));
  }
  const auto div = green_function(q1, 0.0, {0}, {0});
  CHECK(std::isinf(div.value));
  CHECK(div.divergent);
  CHECK(div.classification == Recurrence::recurrent);

  const SpectralIntegrator q3(build_nearest_neighbor_kernel(3));
  const auto g = green_function(q3, 0.0, {0, 0, 0}, {0, 0, 0});
  CHECK(g.value == doctest::Approx(oracle::watson_g0()).epsilon(1e-6));
  CHECK(std::abs(g.value - 1.516386) < 1e-3);
  CHECK(g.classification == Recurrence::transient);
  // G_0(x,0) < G_0(0,0) away from the origin
  CHECK(green_function(q3, 0.0, {1, 0, 0}, {0, 0, 0}).value < g.value);
  // g(e_1) = G_0(0,0) - 1 for the nearest-neighbour walk with unit rate
  CHECK(green_function(q3, 0.0, {1, 0, 0}, {0, 0, 0}).value == doctest::Approx(g.value - 1.0).epsilon(1e-5));
}

TEST_CASE("Green function decreases in lambda") {
  const SpectralIntegrator q2(build_nearest_neighbor_kernel(2));
  double prev = std::numeric_limits<double>::infinity();
  for (double lam : {1e-3, 1e-2, 0.1, 0.5, 1.0, 4.0}) {
    const double v = green_function(q2, lam, {0, 0}, {0, 0}).value;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("recurrence classification") {
  CHECK(classify_by_rule(build_nearest_neighbor_kernel(1)) == Recurrence::recurrent);
  CHECK(classify_by_rule(build_nearest_neighbor_kernel(2)) == Recurrence::recurrent);
  CHECK(classify_by_rule(build_nearest_neighbor_kernel(3)) == Recurrence::transient);
  CHECK(classify_by_rule(build_heavy_tail_kernel(1, 0.8, DirectionFunction::constant(1.0), 64, 1.0,
                                                 TailMode::exact)) == Recurrence::transient);
  CHECK(classify_by_rule(build_heavy_tail_kernel(2, 1.5, DirectionFunction::constant(1.0), 8, 1.0)) ==
        Recurrence::transient);

  const auto r2 = classify_recurrence(build_nearest_neighbor_kernel(2));
  CHECK(r2.rule == Recurrence::recurrent);
  CHECK(r2.numeric == Recurrence::recurrent);
  CHECK(r2.consistent);
  const auto r3 = classify_recurrence(build_nearest_neighbor_kernel(3));
  CHECK(r3.numeric == Recurrence::transient);
  CHECK(r3.consistent);
}

TEST_CASE("critical intensity") {
  CHECK(critical_intensity(build_nearest_neighbor_kernel(1)) == 0.0);
  CHECK(critical_intensity(build_nearest_neighbor_kernel(3)) == doctest::Approx(1.0 / oracle::watson_g0()).epsilon(1e-6));
  CHECK(critical_intensity(build_nearest_neighbor_kernel(3)) == doctest::Approx(0.65946).epsilon(1e-4));
  const auto heavy = build_heavy_tail_kernel(1, 0.5, DirectionFunction::constant(1.0), 64, 1.0, TailMode::exact);
  const double bc = critical_intensity(heavy);
  CHECK(bc > 0.0);
  // double-resolution check: a tighter tolerance moves the value by far less than it
  const SpectralIntegrator tight(heavy, {.rel_tol = 1e-9});
  CHECK(critical_intensity(tight) == doctest::Approx(bc).epsilon(1e-5));
}

TEST_CASE("lambda0") {
  const SpectralIntegrator q1(build_nearest_neighbor_kernel(1), {.rel_tol = 1e-12});
  const auto r1 = solve_lambda0(q1, 1.0);
  CHECK(std::abs(r1.lambda0 - (std::sqrt(2.0) - 1.0)) < 1e-8);
  CHECK(r1.residual < 1e-8);
  CHECK(std::abs(solve_lambda0(q1, 2.0).lambda0 - (std::sqrt(5.0) - 1.0)) < 1e-8);
  CHECK_THROWS_AS(solve_lambda0(q1, 0.0), ValidationError);

  const SpectralIntegrator q3(build_nearest_neighbor_kernel(3));
  const double bc = critical_intensity(q3);
  CHECK_THROWS_AS(solve_lambda0(q3, bc), ValidationError);
  CHECK_THROWS_AS(solve_lambda0(q3, 0.5 * bc), ValidationError);
  const auto r3 = solve_lambda0(q3, 1.0);
  CHECK(r3.lambda0 > 0.0);
  CHECK(green_function(q3, r3.lambda0, {0, 0, 0}, {0, 0, 0}).value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gamma tilde closed forms") {
  const auto k = build_heavy_tail_kernel(1, 1.0, DirectionFunction::constant(1.0), 8, 1.0);
  SymbolFit fit;
  fit.alpha_hat = fit.alpha_used = 1.0;
  fit.directions = {{1.0}, {-1.0}};
  fit.slopes = {1.0, 1.0};
  fit.eta = {1.0, 1.0};
  fit.eta_min = fit.eta_max = 1.0;
  CHECK(gamma_tilde(k, fit, {1}) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
  CHECK(gamma_tilde(k, fit, {2}) == doctest::Approx(4.0 / std::numbers::pi).epsilon(1e-12));
  CHECK(gamma_tilde(k, fit, {0}) == 0.0);

  // d = 2, isotropic eta = 1, alpha = 2: (1/(2(2pi)^2)) int <w,x>^2 e^{-|w|^2} dw = |x|^2 pi/2 /(8 pi^2)
  const auto k2 = build_nearest_neighbor_kernel(2);
  SymbolFit f2;
  f2.alpha_hat = f2.alpha_used = 2.0;
  f2.directions = default_directions(2);
  f2.eta.assign(f2.directions.size(), 1.0);
  f2.slopes.assign(f2.directions.size(), 2.0);
  f2.eta_min = f2.eta_max = 1.0;
  CHECK(gamma_tilde(k2, f2, {1, 1}) == doctest::Approx(2.0 * (std::numbers::pi / 2.0) / (8.0 * std::numbers::pi * std::numbers::pi)).epsilon(1e-6));
}

TEST_CASE("delta asymptotics") {
  const auto k = build_heavy_tail_kernel(1, 1.5, DirectionFunction::constant(1.0), 64, 1.0, TailMode::exact);
  const SpectralIntegrator quad(k);
  SymbolFitOptions o;
  o.window = {1e-5, 1e-3};
  const auto fit = fit_symbol_tail(k, default_directions(1), o);
  CHECK_THROWS_AS(verify_delta_asymptotics(quad, fit, {0}, {10.0}), ValidationError);
  const auto da = verify_delta_asymptotics(quad, fit, {1}, {1000.0, 10000.0});
  CHECK(da.exponent == doctest::Approx(2.0));
  CHECK(std::abs(da.ratio_curve.back() - 1.0) < 0.1);
  CHECK(std::abs(da.ratio_curve.back() - 1.0) < std::abs(da.ratio_curve.front() - 1.0) + 1e-3);

  const auto grid = doubling_grid(10.0, 100.0);
  REQUIRE(grid.size() == 4);
  CHECK(grid[3] == 80.0);
}

TEST_CASE("Green growth fit as lambda -> 0") {
  // d = 1 simple walk: G ~ (2 lambda)^{-1/2}
  const SpectralIntegrator q1(build_nearest_neighbor_kernel(1), {.rel_tol = 1e-10});
  const auto fit = fit_green_growth(q1, {1e-6, 1e-5, 1e-4});
  CHECK(fit.exponent == doctest::Approx(-0.5).epsilon(1e-3));
  CHECK(fit.amplitude == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
  const auto fixed = fit_green_growth(q1, {1e-6, 1e-5, 1e-4}, -0.5);
  CHECK(fixed.exponent == -0.5);
  CHECK(fixed.amplitude == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
}
