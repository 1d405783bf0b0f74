#include "brw/branching.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "brw/error.hpp"

namespace brw {

namespace {

constexpr int kRootGrid = 10000;

// First sign change of h on a uniform grid over [a, b], refined by bisection.
// Returns nullopt when h stays positive.
template <class H>
std::optional<double> least_root(H&& h, double a, double b) {
  double prev_u = a;
  double prev_h = h(a);
  if (prev_h == 0.0) return a;
  if (prev_h < 0.0) return std::nullopt;
  for (int i = 1; i <= kRootGrid; ++i) {
    const double u = a + (b - a) * i / kRootGrid;
    const double hu = h(u);
    if (hu == 0.0) return u;
    if (hu < 0.0) {
      boost::math::tools::eps_tolerance<double> stop(52);
      std::uintmax_t iters = 200;
      const auto [lo, hi] = boost::math::tools::bisect(h, prev_u, u, stop, iters);
      return 0.5 * (lo + hi);
    }
    prev_u = u;
    prev_h = hu;
  }
  return std::nullopt;
}

}  // namespace

BranchingLaw::BranchingLaw(std::vector<double> b) : b_(std::move(b)) {
  if (b_.size() < 2) throw ValidationError("branching law needs at least b_0 and b_1");
  double sum = 0.0, scale = 0.0;
  for (std::size_t n = 0; n < b_.size(); ++n) {
    if (!std::isfinite(b_[n])) throw ValidationError("branching rates must be finite");
    if (n != 1 && b_[n] < 0.0) {
      throw ValidationError("b_" + std::to_string(n) + " < 0: rates for n != 1 must be >= 0");
    }
    sum += b_[n];
    scale += std::abs(b_[n]);
  }
  if (!(b_[1] < 0.0)) throw ValidationError("b_1 must be negative");
  if (std::abs(sum) > 4.0 * std::numeric_limits<double>::epsilon() * scale) {
    std::ostringstream os;
    os << "sum of b_n must vanish (got " << sum << ")";
    throw ValidationError(os.str());
  }
  while (b_.size() > 2 && b_.back() == 0.0) b_.pop_back();
}

double f_eval(const BranchingLaw& law, double u) {
  const auto& b = law.coefficients();
  double acc = 0.0;
  for (auto it = b.rbegin(); it != b.rend(); ++it) acc = acc * u + *it;
  return acc;
}

double f_derivative(const BranchingLaw& law, int order, double u) {
  if (order < 0) throw ValidationError("derivative order must be >= 0");
  const auto& b = law.coefficients();
  double acc = 0.0;
  for (int n = static_cast<int>(b.size()) - 1; n >= order; --n) {
    double falling = 1.0;
    for (int j = 0; j < order; ++j) falling *= n - j;
    acc = acc * u + falling * b[n];
  }
  return acc;
}

double beta(const BranchingLaw& law) {
  const auto& b = law.coefficients();
  double s = 0.0;
  for (std::size_t n = 1; n < b.size(); ++n) s += static_cast<double>(n) * b[n];
  return s;
}

std::string to_string(Criticality c) {
  switch (c) {
    case Criticality::subcritical: return "subcritical";
    case Criticality::critical: return "critical";
    case Criticality::supercritical: return "supercritical";
  }
  return "?";
}

Criticality classify_criticality(const BranchingLaw& law, double beta_c) {
  if (!(beta_c >= 0.0)) throw ValidationError("beta_c must be >= 0");
  const double b = beta(law);
  if (std::abs(b - beta_c) <= 1e-12 * std::max(std::abs(b), std::abs(beta_c))) {
    return Criticality::critical;
  }
  return b > beta_c ? Criticality::supercritical : Criticality::subcritical;
}

double root_u_star(const BranchingLaw& law) {
  if (!(beta(law) > 0.0)) throw ValidationError("u_* exists only for beta > 0");
  const auto r = least_root([&](double u) { return f_eval(law, u); }, 0.0, 1.0);
  if (!r || *r >= 1.0) throw ConvergenceError("no root of f in [0,1)", 1.0, 0.0);
  return *r;
}

SignReport check_f_sign_structure(const BranchingLaw& law, int grid_points) {
  SignReport rep;
  rep.beta = beta(law);
  const int K = law.max_offspring();
  double scale = 0.0;
  for (double b : law.coefficients()) scale += std::abs(b);
  auto note = [&](const std::string& what, double u, double v) {
    std::ostringstream os;
    os << what << " at u = " << u << " (value " << v << ")";
    rep.violations.push_back(os.str());
  };
  const int n = std::max(grid_points, 3);
  if (rep.beta <= 0.0) {
    for (int i = 0; i < n; ++i) {
      const double u = static_cast<double>(i) / (n - 1);
      if (i < n - 1) {
        const double f = f_eval(law, u);
        if (!(f > 0.0)) note("f <= 0 on [0,1)", u, f);
      }
      const double d1 = f_derivative(law, 1, u);
      if (d1 > 1e-12 * scale) note("f' > 0", u, d1);
      for (int r = 2; r <= K; ++r) {
        const double dr = f_derivative(law, r, u);
        if (dr < -1e-12 * scale * std::pow(K, r)) note("f^(" + std::to_string(r) + ") < 0", u, dr);
      }
    }
    return rep;
  }
  const double us = root_u_star(law);
  rep.u_star = us;
  int changes = 0;
  int last_sign = 0;
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / (n - 1);
    const double f = f_eval(law, u);
    if (u > 0.0 && u < us - 1e-9 && !(f > 0.0)) note("f <= 0 on (0,u_*)", u, f);
    if (u > us + 1e-9 && u < 1.0 && !(f < 0.0)) note("f >= 0 on (u_*,1)", u, f);
    const double d1 = f_derivative(law, 1, u);
    const int s = d1 > 1e-12 * scale ? 1 : (d1 < -1e-12 * scale ? -1 : 0);
    if (s != 0) {
      if (last_sign != 0 && s != last_sign) ++changes;
      last_sign = s;
    }
  }
  if (changes != 1) note("f' sign changes != 1", 1.0, changes);
  return rep;
}

LaplaceParameter LaplaceParameter::finite(double z) {
  if (!(z >= 0.0)) throw ValidationError("Laplace parameter z must be >= 0");
  if (std::isinf(z)) return infinity();
  return LaplaceParameter{z, false};
}

double LaplaceParameter::exp_minus() const { return is_infinite ? 0.0 : std::exp(-value); }

ExtinctionRoot extinction_root(const BranchingLaw& law, double G0_00, double G0_x0,
                               LaplaceParameter z, LatticePoint x) {
  if (!(G0_00 > 0.0) || !std::isfinite(G0_00)) {
    throw ValidationError("G_0(0,0) must be finite and positive (transient kernel)");
  }
  if (!(G0_x0 > 0.0) || G0_x0 > G0_00 * (1.0 + 1e-12)) {
    throw ValidationError("need 0 < G_0(x,0) <= G_0(0,0)");
  }
  const double e = z.exp_minus();
  auto h = [&](double c) { return 1.0 - c - e - G0_00 * f_eval(law, 1.0 - c); };
  const auto root = least_root(h, 0.0, 1.0);
  if (!root) throw ConvergenceError("no root of the extinction equation in [0,1]", 0.0, 0.0);
  ExtinctionRoot out;
  out.z = z;
  out.x = std::move(x);
  out.c0 = *root;
  out.c = 1.0 - e - G0_x0 * f_eval(law, 1.0 - out.c0);
  out.residual = std::abs(h(out.c0));
  if (!(out.c >= -1e-14 && out.c <= 1.0 + 1e-14)) {
    std::ostringstream os;
    os << "extinction root c(z,x) = " << out.c << " outside [0,1]";
    throw InvariantError(os.str());
  }
  return out;
}

}  // namespace brw
