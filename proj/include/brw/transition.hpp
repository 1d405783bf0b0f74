#pragma once

#include <optional>
#include <string>
#include <vector>

#include "brw/kernel.hpp"
#include "brw/quadrature.hpp"

namespace brw {

enum class Recurrence { recurrent, transient };

std::string to_string(Recurrence r);

/// p(t, x, y). Only y - x enters the computation.
QuadratureResult transition_probability(const SpectralIntegrator& quad, double t,
                                        const LatticePoint& x, const LatticePoint& y);
QuadratureResult transition_probability(const WalkKernel& k, double t, const LatticePoint& x,
                                        const LatticePoint& y);

/// p(t,0,0) - p(t,x,0) as one integral of 2 sin^2(<theta,x>/2) e^{phi t}.
QuadratureResult transition_delta(const SpectralIntegrator& quad, double t, const LatticePoint& x);
QuadratureResult transition_delta(const WalkKernel& k, double t, const LatticePoint& x);

struct GreenEvaluation {
  double lambda = 0.0;
  LatticePoint x;
  LatticePoint y;
  /// G_lambda(x, y), +infinity for the divergence marker.
  double value = 0.0;
  double quad_error = 0.0;
  bool divergent = false;
  Recurrence classification = Recurrence::transient;
  /// Set when the numerics disagree with the rule-based classification.
  std::string note;
};

GreenEvaluation green_function(const SpectralIntegrator& quad, double lambda, const LatticePoint& x,
                               const LatticePoint& y);
GreenEvaluation green_function(const WalkKernel& k, double lambda, const LatticePoint& x,
                               const LatticePoint& y);

struct RecurrenceReport {
  Recurrence rule = Recurrence::transient;     // authoritative
  Recurrence numeric = Recurrence::transient;  // from G_lambda growth as lambda -> 0
  bool consistent = true;
  std::vector<double> lambdas;
  std::vector<double> green_values;
  /// Ratio of consecutive G increments per decade of lambda; >= 0.9 reads as
  /// divergent growth.
  double increment_ratio = 0.0;
  std::string detail;
};

/// Rule-based classification only (no quadrature).
Recurrence classify_by_rule(const WalkKernel& k);
RecurrenceReport classify_recurrence(const SpectralIntegrator& quad);
RecurrenceReport classify_recurrence(const WalkKernel& k);

/// 0 for recurrent kernels, 1/G_0(0,0) otherwise.
double critical_intensity(const SpectralIntegrator& quad);
double critical_intensity(const WalkKernel& k);

struct Lambda0Result {
  double lambda0 = 0.0;
  double green_value = 0.0;  // G_{lambda0}(0,0)
  double residual = 0.0;     // |G - 1/beta|
  int evaluations = 0;
};

/// Positive root of G_lambda(0,0) = 1/beta for beta > beta_c.
Lambda0Result solve_lambda0(const SpectralIntegrator& quad, double beta);
Lambda0Result solve_lambda0(const WalkKernel& k, double beta);

/// (1/(2(2pi)^d)) integral over R^d of <w,x>^2 exp(-eta(w/|w|)|w|^alpha) dw,
/// with the radial part done in closed form.
double gamma_tilde(const WalkKernel& k, const SymbolFit& fit, const LatticePoint& x);

struct DeltaAsymptotics {
  LatticePoint x;
  double gamma_tilde = 0.0;
  double exponent = 0.0;  // (d+2)/alpha
  std::vector<double> t;
  std::vector<double> delta;
  std::vector<double> delta_error;
  std::vector<double> ratio_curve;
};

DeltaAsymptotics verify_delta_asymptotics(const SpectralIntegrator& quad, const SymbolFit& fit,
                                          const LatticePoint& x, const std::vector<double>& t_grid);

/// Geometric t grid t0, 2 t0, 4 t0, ... up to t1.
std::vector<double> doubling_grid(double t0, double t1);

struct GreenGrowthFit {
  double exponent = 0.0;   // s in G ~ gamma * lambda^{s}
  double amplitude = 0.0;  // gamma
  double residual = 0.0;   // rms of the log fit
  std::vector<double> lambdas;
  std::vector<double> values;
};

/// Fits G_lambda(0,0) ~ amplitude * lambda^exponent over the given lambdas.
/// With a fixed exponent only the amplitude is fitted.
GreenGrowthFit fit_green_growth(const SpectralIntegrator& quad, const std::vector<double>& lambdas,
                                std::optional<double> fixed_exponent = std::nullopt);

}  // namespace brw
