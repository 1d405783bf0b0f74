#include <doctest.h>

#include <boost/math/special_functions/zeta.hpp>
#include <cmath>

#include "brw/tail_symbol.hpp"
#include "oracles.hpp"

using brw::PowerLawSymbol;

TEST_CASE("power-law symbol matches direct summation") {
  for (double s : {1.3, 1.5, 2.0, 2.5, 2.9}) {
    const PowerLawSymbol D(s);
    for (double theta : {0.01, 0.3, 1.0, 2.0, 3.1}) {
      CAPTURE(s);
      CAPTURE(theta);
      const double ref = oracle::power_law_symbol_bruteforce(s, theta);
      // the dropped oscillating remainder is about N^{-s}/theta
      const double tol = theta < 0.1 ? 2e-6 : 1e-8;
      CHECK(D(theta) == doctest::Approx(ref).epsilon(tol));
      CHECK(D(-theta) == doctest::Approx(D(theta)));
    }
  }
}

TEST_CASE("power-law symbol near zero is dominated by the |theta|^{s-1} term") {
  const PowerLawSymbol D(2.5);
  const double c = D.leading_coefficient();
  // -Gamma(1-s) cos(pi(s-1)/2) for s = 2.5
  CHECK(c == doctest::Approx(-std::tgamma(-1.5) * std::cos(std::numbers::pi * 0.75)).epsilon(1e-12));
  const double th = 1e-6;
  // next term of the expansion: zeta(s-2) theta^2 / 2
  const double two_term = c * std::pow(th, 1.5) + 0.5 * boost::math::zeta(0.5) * th * th;
  CHECK(D(th) == doctest::Approx(two_term).epsilon(1e-6));
  CHECK(std::abs(D(th) / (c * std::pow(th, 1.5)) - 1.0) < 1e-3);
  CHECK(D(0.0) == 0.0);
}

TEST_CASE("power-law tail sum") {
  for (double s : {1.5, 2.5}) {
    for (int R : {1, 2, 64}) {
      double direct = 0.0;
      const long N = 4'000'000;
      for (long k = N; k > R; --k) direct += std::pow(static_cast<double>(k), -s);
      direct += std::pow(static_cast<double>(N), 1.0 - s) / (s - 1.0) - 0.5 * std::pow(static_cast<double>(N), -s);
      CHECK(brw::power_law_tail_sum(s, R) == doctest::Approx(direct).epsilon(1e-9));
    }
  }
}
