#pragma once

#include <vector>

namespace brw {

/// D_s(theta) = sum_{k>=1} k^{-s} (1 - cos k theta) for s in (1, 3) and
/// |theta| <= pi, i.e. zeta(s) - Re Li_s(e^{i theta}).
///
/// Uses the expansion of the polylogarithm around theta = 0, which converges
/// for |theta| < 2pi and has no cancellation near the origin:
///   D_s = -Gamma(1-s) cos(pi(s-1)/2) |theta|^{s-1}
///         - sum_{m>=1} (-1)^m zeta(s-2m) theta^{2m} / (2m)!
/// s = 2 uses the closed form pi|theta|/2 - theta^2/4.
class PowerLawSymbol {
 public:
  explicit PowerLawSymbol(double s);

  double operator()(double theta) const;
  double exponent() const { return s_; }
  /// Coefficient of |theta|^{s-1} in D_s.
  double leading_coefficient() const { return leading_; }

 private:
  double s_;
  double leading_ = 0.0;
  bool closed_form_ = false;
  std::vector<double> even_coeff_;  // multiplies theta^{2m}, m = 1, 2, ...
};

/// sum_{k>R} k^{-s}.
double power_law_tail_sum(double s, int radius);

}  // namespace brw
