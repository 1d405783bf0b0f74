#include "brw/tail_symbol.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "brw/error.hpp"

namespace brw {

namespace {
constexpr int kSeriesTerms = 40;  // (theta/2pi)^{2m} <= 4^{-m} on [-pi, pi]
}

PowerLawSymbol::PowerLawSymbol(double s) : s_(s) {
  if (!(s > 1.0 && s < 3.0)) throw ValidationError("power-law symbol needs exponent s in (1,3)");
  if (std::abs(s - 2.0) < 1e-9) {
    s_ = 2.0;
    closed_form_ = true;
    leading_ = std::numbers::pi / 2.0;
    return;
  }
  leading_ = -boost::math::tgamma(1.0 - s) * std::cos(std::numbers::pi * (s - 1.0) / 2.0);
  even_coeff_.reserve(kSeriesTerms);
  for (int m = 1; m <= kSeriesTerms; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    const double fact = boost::math::factorial<double>(static_cast<unsigned>(2 * m));
    even_coeff_.push_back(-sign * boost::math::zeta(s - 2.0 * m) / fact);
  }
}

double PowerLawSymbol::operator()(double theta) const {
  const double x = std::abs(theta);
  if (x == 0.0) return 0.0;
  if (closed_form_) return leading_ * x - 0.25 * x * x;
  const double x2 = x * x;
  // Horner over theta^2, highest order first.
  double poly = 0.0;
  for (auto it = even_coeff_.rbegin(); it != even_coeff_.rend(); ++it) poly = poly * x2 + *it;
  return leading_ * std::pow(x, s_ - 1.0) + poly * x2;
}

double power_law_tail_sum(double s, int radius) {
  double partial = 0.0;
  // Small terms first.
  for (int k = radius; k >= 1; --k) partial += std::pow(static_cast<double>(k), -s);
  return boost::math::zeta(s) - partial;
}

}  // namespace brw
