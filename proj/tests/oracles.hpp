#pragma once

// Reference values computed independently of the library.

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

/// e^{-t} I_n(t) from the power series, summed in log space.
inline double scaled_bessel(int n, double t) {
  double sum = 0.0;
  for (int k = 0; k < 400; ++k) {
    const double log_term = (2.0 * k + n) * std::log(t / 2.0) - std::lgamma(k + 1.0) - std::lgamma(k + n + 1.0) - t;
    const double term = std::exp(log_term);
    sum += term;
    if (k > t && term < 1e-18 * sum) break;
  }
  return sum;
}

/// Watson's closed form for the simple cubic lattice with unit total jump
/// rate: G_0(0,0) = sqrt(6)/(32 pi^3) Gamma(1/24)Gamma(5/24)Gamma(7/24)Gamma(11/24).
inline double watson_g0() {
  const double pi = std::numbers::pi;
  return std::sqrt(6.0) / (32.0 * pi * pi * pi) * std::tgamma(1.0 / 24) * std::tgamma(5.0 / 24) *
         std::tgamma(7.0 / 24) * std::tgamma(11.0 / 24);
}

/// sum_{k>=1} k^{-s} (1 - cos k theta) by direct summation to N with the
/// non-oscillating part of the remainder added back.
inline double power_law_symbol_bruteforce(double s, double theta, long N = 2'000'000) {
  double sum = 0.0;
  for (long k = N; k >= 1; --k) sum += std::pow(static_cast<double>(k), -s) * (1.0 - std::cos(k * theta));
  // sum_{k>N} k^{-s} ~ N^{1-s}/(s-1) - N^{-s}/2
  const double rest = std::pow(static_cast<double>(N), 1.0 - s) / (s - 1.0) - 0.5 * std::pow(static_cast<double>(N), -s);
  return sum + rest;
}

/// d = 1 simple walk: G_lambda(0,0) = 1/sqrt(lambda (lambda + 2)).
inline double simple_walk_green(double lambda) { return 1.0 / std::sqrt(lambda * (lambda + 2.0)); }

/// d = 1 simple walk: lambda0 solving G_lambda = 1/beta.
inline double simple_walk_lambda0(double beta) { return std::sqrt(1.0 + beta * beta) - 1.0; }

}  // namespace oracle
