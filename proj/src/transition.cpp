#include "brw/transition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "brw/error.hpp"

namespace brw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// e^{-40} ~ 4e-18: nodes below this weight are dropped from e^{phi t} sums.
constexpr double kExpCut = 40.0;

LatticePoint difference(const LatticePoint& x, const LatticePoint& y) {
  if (x.size() != y.size()) throw ValidationError("lattice points have different dimensions");
  LatticePoint v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = y[i] - x[i];
  return v;
}

void check_dimension(const SpectralIntegrator& quad, const LatticePoint& v) {
  if (static_cast<int>(v.size()) != quad.kernel().dimension()) {
    throw ValidationError("lattice point dimension does not match the kernel");
  }
}

double dot(std::span<const double> theta, const LatticePoint& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += theta[i] * static_cast<double>(v[i]);
  return s;
}

bool is_origin(const LatticePoint& v) {
  return std::all_of(v.begin(), v.end(), [](auto c) { return c == 0; });
}

// Quadrature noise may push a nonnegative quantity slightly below zero.
void clamp_nonnegative(QuadratureResult& r, const char* what) {
  if (r.value >= 0.0) return;
  if (r.value >= -(r.error + 1e-12)) {
    r.value = 0.0;
    return;
  }
  std::ostringstream os;
  os << what << " came out negative (" << r.value << ") beyond its error estimate";
  throw InvariantError(os.str());
}

// p(t, 0, v): the evaluator never sees x and y separately.
QuadratureResult transition_from_origin(const SpectralIntegrator& quad, double t,
                                        const LatticePoint& v) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("time must be finite and >= 0");
  check_dimension(quad, v);
  if (t == 0.0) {
    QuadratureResult r;
    r.value = is_origin(v) ? 1.0 : 0.0;
    return r;
  }
  auto g = [&](std::span<const double> theta, double phi) {
    return std::cos(dot(theta, v)) * std::exp(phi * t);
  };
  auto r = quad.integrate(g, displacement_frequency(v), -kExpCut / t);
  clamp_nonnegative(r, "transition probability");
  if (r.value > 1.0 && r.value <= 1.0 + r.error + 1e-12) r.value = 1.0;
  return r;
}

QuadratureResult green_integral(const SpectralIntegrator& quad, double lambda,
                                const LatticePoint& v, std::optional<double> rel_tol) {
  auto g = [&](std::span<const double> theta, double phi) {
    return std::cos(dot(theta, v)) / (lambda - phi);
  };
  return quad.integrate(g, displacement_frequency(v), -kInf, rel_tol);
}

GreenEvaluation green_impl(const SpectralIntegrator& quad, double lambda, const LatticePoint& x,
                           const LatticePoint& y, std::optional<double> rel_tol) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be >= 0");
  const auto v = difference(x, y);
  check_dimension(quad, v);
  GreenEvaluation out;
  out.lambda = lambda;
  out.x = x;
  out.y = y;
  out.classification = classify_by_rule(quad.kernel());
  if (lambda == 0.0 && out.classification == Recurrence::recurrent) {
    out.value = kInf;
    out.divergent = true;
    return out;
  }
  const auto r = green_integral(quad, lambda, v, rel_tol);
  out.quad_error = r.error;
  if (r.divergent) {
    out.value = kInf;
    out.divergent = true;
    out.note = "G_0 diverges numerically at theta = 0 although the kernel is classified transient";
    return out;
  }
  out.value = r.value;
  return out;
}

double tight_tolerance(const SpectralIntegrator& quad) {
  const int d = quad.kernel().dimension();
  const double tight = d == 1 ? 1e-11 : (d == 2 ? 1e-9 : quad.relative_tolerance());
  return std::min(quad.relative_tolerance(), tight);
}

}  // namespace

std::string to_string(Recurrence r) { return r == Recurrence::recurrent ? "recurrent" : "transient"; }

QuadratureResult transition_probability(const SpectralIntegrator& quad, double t,
                                        const LatticePoint& x, const LatticePoint& y) {
  return transition_from_origin(quad, t, difference(x, y));
}

QuadratureResult transition_probability(const WalkKernel& k, double t, const LatticePoint& x,
                                        const LatticePoint& y) {
  return transition_probability(SpectralIntegrator(k), t, x, y);
}

QuadratureResult transition_delta(const SpectralIntegrator& quad, double t, const LatticePoint& x) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("time must be finite and >= 0");
  check_dimension(quad, x);
  QuadratureResult r;
  if (t == 0.0 || is_origin(x)) return r;
  auto g = [&](std::span<const double> theta, double phi) {
    const double s = std::sin(0.5 * dot(theta, x));
    return 2.0 * s * s * std::exp(phi * t);
  };
  r = quad.integrate(g, displacement_frequency(x), -kExpCut / t);
  clamp_nonnegative(r, "transition delta");
  return r;
}

QuadratureResult transition_delta(const WalkKernel& k, double t, const LatticePoint& x) {
  return transition_delta(SpectralIntegrator(k), t, x);
}

GreenEvaluation green_function(const SpectralIntegrator& quad, double lambda, const LatticePoint& x,
                               const LatticePoint& y) {
  return green_impl(quad, lambda, x, y, std::nullopt);
}

GreenEvaluation green_function(const WalkKernel& k, double lambda, const LatticePoint& x,
                               const LatticePoint& y) {
  return green_function(SpectralIntegrator(k), lambda, x, y);
}

Recurrence classify_by_rule(const WalkKernel& k) {
  const int d = k.dimension();
  if (k.kind() == KernelKind::finite_variance) {
    return d <= 2 ? Recurrence::recurrent : Recurrence::transient;
  }
  const double alpha = k.tail_alpha().value_or(2.0);
  return (d == 1 && alpha >= 1.0) ? Recurrence::recurrent : Recurrence::transient;
}

RecurrenceReport classify_recurrence(const SpectralIntegrator& quad) {
  RecurrenceReport rep;
  rep.rule = classify_by_rule(quad.kernel());
  const LatticePoint origin(quad.kernel().dimension(), 0);
  rep.lambdas = {1e-2, 1e-3, 1e-4, 1e-5};
  for (double lam : rep.lambdas) rep.green_values.push_back(green_function(quad, lam, origin, origin).value);
  const auto& g = rep.green_values;
  const double d1 = g[2] - g[1];
  const double d2 = g[3] - g[2];
  rep.increment_ratio = d1 > 0.0 ? d2 / d1 : 0.0;
  rep.numeric = rep.increment_ratio >= 0.9 ? Recurrence::recurrent : Recurrence::transient;
  rep.consistent = rep.numeric == rep.rule;
  std::ostringstream os;
  os << "G_lambda(0,0) at lambda = 1e-2..1e-5: ";
  for (std::size_t i = 0; i < g.size(); ++i) os << (i ? ", " : "") << g[i];
  os << "; increment ratio per decade " << rep.increment_ratio;
  if (!rep.consistent) {
    os << "; numerical growth suggests " << to_string(rep.numeric) << ", rule-based "
       << to_string(rep.rule) << " is kept";
  }
  rep.detail = os.str();
  return rep;
}

RecurrenceReport classify_recurrence(const WalkKernel& k) {
  return classify_recurrence(SpectralIntegrator(k));
}

double critical_intensity(const SpectralIntegrator& quad) {
  if (classify_by_rule(quad.kernel()) == Recurrence::recurrent) return 0.0;
  const LatticePoint origin(quad.kernel().dimension(), 0);
  const auto g = green_function(quad, 0.0, origin, origin);
  if (g.divergent) {
    throw ConvergenceError("cannot compute beta_c: " + g.note, kInf, kInf);
  }
  return 1.0 / g.value;
}

double critical_intensity(const WalkKernel& k) { return critical_intensity(SpectralIntegrator(k)); }

Lambda0Result solve_lambda0(const SpectralIntegrator& quad, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
  const double beta_c = critical_intensity(quad);
  if (beta <= beta_c * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "beta = " << beta << " <= beta_c = " << beta_c << ": no positive root of G_lambda = 1/beta";
    throw ValidationError(os.str());
  }
  const LatticePoint origin(quad.kernel().dimension(), 0);
  const double tol = tight_tolerance(quad);
  const double target = 1.0 / beta;
  Lambda0Result out;
  auto h = [&](double lam) {
    ++out.evaluations;
    return green_impl(quad, lam, origin, origin, tol).value - target;
  };
  // G_lambda <= 1/lambda, so h(beta) <= 0.
  double hi = beta;
  double lo = 0.5 * beta;
  int halvings = 0;
  while (h(lo) <= 0.0) {
    hi = lo;
    lo *= 0.5;
    if (++halvings > 400) throw ConvergenceError("could not bracket lambda_0", lo, hi - lo);
  }
  boost::math::tools::eps_tolerance<double> stop(48);
  const auto [a, b] = boost::math::tools::bisect(h, lo, hi, stop);
  out.lambda0 = 0.5 * (a + b);
  out.green_value = green_impl(quad, out.lambda0, origin, origin, tol).value;
  out.residual = std::abs(out.green_value - target);
  if (out.residual >= 1e-8 * target) {
    std::ostringstream os;
    os << "lambda_0 residual " << out.residual << " above 1e-8/beta";
    throw ConvergenceError(os.str(), out.lambda0, b - a);
  }
  return out;
}

Lambda0Result solve_lambda0(const WalkKernel& k, double beta) {
  return solve_lambda0(SpectralIntegrator(k), beta);
}

double gamma_tilde(const WalkKernel& k, const SymbolFit& fit, const LatticePoint& x) {
  const int d = k.dimension();
  if (static_cast<int>(x.size()) != d) throw ValidationError("lattice point dimension mismatch");
  if (!(fit.eta_min > 0.0) || !std::isfinite(fit.eta_max)) {
    throw ValidationError("symbol fit has non-positive or infinite eta");
  }
  const double alpha = fit.alpha_used;
  if (!(alpha > 0.0)) throw ValidationError("symbol fit has no usable exponent");
  if (is_origin(x)) return 0.0;
  const double m = (d + 2.0) / alpha;
  const double radial = boost::math::tgamma(m) / alpha;
  const auto [dirs, w] = sphere_quadrature(d, 5, 8);
  double acc = 0.0;
  std::vector<double> u(d);
  for (std::size_t s = 0; s < w.size(); ++s) {
    double ux = 0.0;
    for (int c = 0; c < d; ++c) {
      u[c] = dirs[s * d + c];
      ux += u[c] * static_cast<double>(x[c]);
    }
    acc += w[s] * ux * ux * std::pow(fit.eta_at(u), -m);
  }
  return radial * acc / (2.0 * std::pow(2.0 * std::numbers::pi, d));
}

DeltaAsymptotics verify_delta_asymptotics(const SpectralIntegrator& quad, const SymbolFit& fit,
                                          const LatticePoint& x, const std::vector<double>& t_grid) {
  if (is_origin(x)) throw ValidationError("x = 0 gives gamma_tilde = 0; the ratio is undefined");
  if (t_grid.empty()) throw ValidationError("empty t grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw ValidationError("t grid must be positive and strictly increasing");
    }
  }
  DeltaAsymptotics out;
  out.x = x;
  out.gamma_tilde = gamma_tilde(quad.kernel(), fit, x);
  out.exponent = (quad.kernel().dimension() + 2.0) / fit.alpha_used;
  for (double t : t_grid) {
    const auto r = transition_delta(quad, t, x);
    out.t.push_back(t);
    out.delta.push_back(r.value);
    out.delta_error.push_back(r.error);
    out.ratio_curve.push_back(r.value * std::pow(t, out.exponent) / out.gamma_tilde);
  }
  return out;
}

std::vector<double> doubling_grid(double t0, double t1) {
  if (!(t0 > 0.0) || !(t1 >= t0)) throw ValidationError("doubling grid needs 0 < t0 <= t1");
  std::vector<double> g;
  for (double t = t0; t <= t1 * (1.0 + 1e-12); t *= 2.0) g.push_back(t);
  return g;
}

GreenGrowthFit fit_green_growth(const SpectralIntegrator& quad, const std::vector<double>& lambdas,
                                std::optional<double> fixed_exponent) {
  if (lambdas.size() < 2) throw ValidationError("need at least two lambda values");
  const LatticePoint origin(quad.kernel().dimension(), 0);
  GreenGrowthFit fit;
  std::vector<double> lx, ly;
  for (double lam : lambdas) {
    if (!(lam > 0.0)) throw ValidationError("lambda values must be positive");
    const auto g = green_function(quad, lam, origin, origin);
    fit.lambdas.push_back(lam);
    fit.values.push_back(g.value);
    lx.push_back(std::log(lam));
    ly.push_back(std::log(g.value));
  }
  const double n = static_cast<double>(lx.size());
  if (fixed_exponent) {
    fit.exponent = *fixed_exponent;
  } else {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    fit.exponent = sxy / sxx;
  }
  double c = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) c += ly[i] - fit.exponent * lx[i];
  c /= n;
  fit.amplitude = std::exp(c);
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (c + fit.exponent * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace brw
