#include "brw/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "brw/error.hpp"
#include "brw/parallel.hpp"

namespace brw {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kLevels = 6;

template <unsigned N>
std::vector<std::pair<double, double>> boost_gauss() {
  using Rule = boost::math::quadrature::gauss<double, N>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  std::vector<std::pair<double, double>> out;
  // Boost stores the non-negative half; mirror it.
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      out.emplace_back(0.0, w[i]);
    } else {
      out.emplace_back(x[i], w[i]);
      out.emplace_back(-x[i], w[i]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct LevelSpec {
  int radial_order;
  int circle_points;  // d = 2 sphere
  int polar_order;    // d >= 3 polar angle, azimuth uses twice as many
  int torus_2d;
  int torus_3d;
};

constexpr std::array<LevelSpec, kLevels> kLadder{{
    {8, 32, 12, 32, 24},
    {12, 48, 16, 48, 32},
    {16, 64, 24, 64, 48},
    {24, 96, 32, 96, 64},
    {32, 128, 48, 128, 96},
    {48, 192, 64, 192, 128},
}};

double ball_radius(int d) { return d == 1 ? kPi : 3.1; }
int panel_count(int d) { return d == 1 ? 40 : 24; }

// Radial partition of unity for d >= 2: an analytic erfc step centred at
// kMid with width kWidth, cut to exactly 1 below kMid - 6 kWidth and to 0
// beyond the ball (where it is below 1e-17). Analyticity keeps the torus
// trapezoid rule spectrally accurate on (1 - chi) g.
constexpr double kMid = 1.6;
constexpr double kWidth = 0.25;

double partition(double r, double rho) {
  if (r <= kMid - 6.0 * kWidth) return 1.0;
  if (r >= rho) return 0.0;
  return 0.5 * std::erfc((r - kMid) / kWidth);
}

// Sphere rule on S^{d-1}: directions (flattened) and weights summing to the
// sphere's surface area.
void sphere_rule(int d, int polar_order, int circle_points, std::vector<double>& dirs,
                 std::vector<double>& w) {
  dirs.clear();
  w.clear();
  if (d == 1) {
    dirs = {1.0, -1.0};
    w = {1.0, 1.0};
    return;
  }
  if (d == 2) {
    const int n = circle_points;
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * kPi * (i + 0.5) / n;
      dirs.push_back(std::cos(a));
      dirs.push_back(std::sin(a));
      w.push_back(2.0 * kPi / n);
    }
    return;
  }
  // S^{d-1} = {(cos psi, sin psi * v) : v in S^{d-2}}, measure sin^{d-2} psi dpsi dv.
  std::vector<double> sub_dirs, sub_w;
  sphere_rule(d - 1, polar_order, circle_points, sub_dirs, sub_w);
  const auto gl = gauss_legendre(std::min(polar_order, 64));
  for (const auto& [x, gw] : gl) {
    const double psi = 0.5 * kPi * (x + 1.0);
    const double s = std::sin(psi);
    const double c = std::cos(psi);
    const double pw = 0.5 * kPi * gw * std::pow(s, d - 2);
    for (std::size_t j = 0; j < sub_w.size(); ++j) {
      dirs.push_back(c);
      for (int k = 0; k < d - 1; ++k) dirs.push_back(s * sub_dirs[j * (d - 1) + k]);
      w.push_back(pw * sub_w[j]);
    }
  }
}

// Near the origin phi is close to isotropic, so panels inside kInnerRadius
// get a coarser sphere.
constexpr double kInnerRadius = 0.5;
constexpr std::array<int, kLevels> kInnerPolar{8, 8, 12, 12, 16, 16};
constexpr std::array<int, kLevels> kInnerCircle{16, 16, 24, 24, 32, 32};

void level_sphere(int d, int level, bool inner, int freq, std::vector<double>& dirs,
                  std::vector<double>& w) {
  const double reach = inner ? kInnerRadius : ball_radius(d);
  const int boost = static_cast<int>(std::ceil(reach * freq));
  const int polar = (inner ? kInnerPolar[level] : kLadder[level].polar_order) + boost;
  const int circle = (inner ? kInnerCircle[level] : kLadder[level].circle_points) + 2 * boost;
  sphere_rule(d, polar, circle, dirs, w);
}

}  // namespace

std::vector<std::pair<double, double>> gauss_legendre(int order) {
  switch (order) {
    case 6: return boost_gauss<6>();
    case 8: return boost_gauss<8>();
    case 12: return boost_gauss<12>();
    case 16: return boost_gauss<16>();
    case 24: return boost_gauss<24>();
    case 32: return boost_gauss<32>();
    case 48: return boost_gauss<48>();
    case 64: return boost_gauss<64>();
    default: break;
  }
  // Orders bumped for oscillation: round up to a supported one.
  for (int o : {6, 8, 12, 16, 24, 32, 48, 64}) {
    if (o >= order) return gauss_legendre(o);
  }
  throw ValidationError("Gauss-Legendre order " + std::to_string(order) + " not supported");
}

std::pair<std::vector<double>, std::vector<double>> sphere_quadrature(int d, int level, int boost) {
  if (d < 1) throw ValidationError("dimension must be >= 1");
  if (level < 0 || level >= kLevels) throw ValidationError("quadrature level out of range");
  std::pair<std::vector<double>, std::vector<double>> out;
  sphere_rule(d, kLadder[level].polar_order + std::max(boost, 0),
              kLadder[level].circle_points + 2 * std::max(boost, 0), out.first, out.second);
  return out;
}

double default_relative_tolerance(int d) { return d <= 2 ? 1e-6 : 1e-4; }

int displacement_frequency(const LatticePoint& v) {
  double s = 0.0;
  for (auto c : v) s += static_cast<double>(c) * static_cast<double>(c);
  return static_cast<int>(std::ceil(std::sqrt(s)));
}

std::size_t SpectralRule::count_above(double phi_floor) const {
  // phi_ is sorted in decreasing order.
  auto it = std::partition_point(phi_.begin(), phi_.end(), [&](double p) { return p >= phi_floor; });
  return static_cast<std::size_t>(it - phi_.begin());
}

SpectralIntegrator::SpectralIntegrator(WalkKernel kernel, QuadratureOptions options)
    : kernel_(std::move(kernel)), options_(options) {
  if (options_.max_level >= kLevels) options_.max_level = kLevels - 1;
  if (options_.min_level < 0) options_.min_level = 0;
  if (options_.min_level > options_.max_level) options_.min_level = options_.max_level;
}

double SpectralIntegrator::relative_tolerance() const {
  return options_.rel_tol > 0.0 ? options_.rel_tol : default_relative_tolerance(kernel_.dimension());
}

std::shared_ptr<const SpectralRule> SpectralIntegrator::rule(int level, int freq) const {
  if (level < 0 || level >= kLevels) throw ValidationError("quadrature level out of range");
  freq = std::max(freq, 0);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find({level, freq});
    if (it != cache_.end()) return it->second;
  }
  auto built = build_rule(level, freq);
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = cache_.emplace(std::make_pair(level, freq), std::move(built));
  return it->second;
}

std::shared_ptr<const SpectralRule> SpectralIntegrator::build_rule(int level, int freq) const {
  const int d = kernel_.dimension();
  const double norm = std::pow(2.0 * kPi, -d);
  const double rho = ball_radius(d);
  const int K = panel_count(d);

  std::vector<double> theta, weight;
  std::vector<double> outer_dirs, outer_w, inner_dirs, inner_w;
  level_sphere(d, level, false, freq, outer_dirs, outer_w);
  level_sphere(d, level, true, freq, inner_dirs, inner_w);

  const auto gl = gauss_legendre(kLadder[level].radial_order);
  for (int k = 0; k < K; ++k) {
    const double hi = rho * std::ldexp(1.0, -k);
    const double lo = 0.5 * hi;
    // Resolve the partition step (d >= 2) and cos<theta, x> oscillations.
    const double width = (d == 1 ? 1.5 : std::min(1.5, 2.0 * kWidth)) / (1.0 + freq);
    const int pieces = static_cast<int>(std::ceil((hi - lo) / width));
    const double step = (hi - lo) / pieces;
    const bool inner = hi <= kInnerRadius;
    const auto& dirs = inner ? inner_dirs : outer_dirs;
    const auto& sw = inner ? inner_w : outer_w;
    const std::size_t ns = sw.size();
    for (int p = 0; p < pieces; ++p) {
      const double a = lo + p * step;
      for (const auto& [x, gw] : gl) {
        const double r = a + 0.5 * step * (x + 1.0);
        const double chi = d == 1 ? 1.0 : partition(r, rho);
        if (chi == 0.0) continue;
        const double rw = 0.5 * step * gw * std::pow(r, d - 1) * chi * norm;
        for (std::size_t s = 0; s < ns; ++s) {
          for (int c = 0; c < d; ++c) theta.push_back(r * dirs[s * d + c]);
          weight.push_back(rw * sw[s]);
        }
      }
    }
  }

  if (d >= 2) {
    const int base = d == 2 ? kLadder[level].torus_2d : kLadder[level].torus_3d;
    int n = base + 2 * freq;
    if (d >= 4) n = std::max(8, base / 2);
    const double cell = std::pow(1.0 / n, d);
    std::vector<int> idx(d, 0);
    std::vector<double> pt(d);
    while (true) {
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) {
        pt[c] = -kPi + 2.0 * kPi * idx[c] / n;
        r2 += pt[c] * pt[c];
      }
      const double w = 1.0 - partition(std::sqrt(r2), rho);
      if (w > 0.0) {
        theta.insert(theta.end(), pt.begin(), pt.end());
        weight.push_back(w * cell);
      }
      int c = 0;
      while (c < d && idx[c] == n - 1) idx[c++] = 0;
      if (c == d) break;
      ++idx[c];
    }
  }

  const std::size_t n = weight.size();
  std::vector<double> phi(n);
  parallel_blocks(n, 2048, options_.threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) phi[i] = kernel_.symbol({theta.data() + i * d, static_cast<std::size_t>(d)});
  });

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return phi[a] > phi[b]; });

  auto rule = std::make_shared<SpectralRule>();
  rule->dim_ = d;
  rule->theta_.resize(n * d);
  rule->weight_.resize(n);
  rule->phi_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = order[i];
    std::copy_n(theta.begin() + j * d, d, rule->theta_.begin() + i * d);
    rule->weight_[i] = weight[j];
    rule->phi_[i] = phi[j];
  }
  rule->core_radius_ = rho * std::ldexp(1.0, -K);
  rule->core_dirs_ = inner_dirs;
  rule->core_weights_.resize(inner_w.size());
  for (std::size_t s = 0; s < inner_w.size(); ++s) rule->core_weights_[s] = inner_w[s] * norm;
  return rule;
}

QuadratureResult SpectralIntegrator::integrate_at(int level, int freq, const Integrand& g,
                                                  double phi_floor) const {
  const auto r = rule(level, freq);
  const int d = r->dimension();
  const std::size_t n = r->count_above(phi_floor);
  QuadratureResult out;
  out.level = level;
  out.nodes = n;
  out.value = parallel_sum(n, options_.threads, [&](std::size_t i) {
    return r->weight(i) * g(r->node(i), r->phi(i));
  });

  // Radial profile F(rad) = rad^{d-1} * sphere average; on [0, eps] it is
  // treated as a power law fitted through F(eps) and F(eps/2).
  const auto dirs = r->core_directions();
  const auto cw = r->core_weights();
  std::vector<double> pt(d);
  auto profile = [&](double rad) {
    double acc = 0.0;
    for (std::size_t s = 0; s < cw.size(); ++s) {
      for (int c = 0; c < d; ++c) pt[c] = rad * dirs[s * d + c];
      acc += cw[s] * g(pt, kernel_.symbol(pt));
    }
    return acc * std::pow(rad, d - 1);
  };
  const double eps = r->core_radius();
  const double f1 = profile(eps);
  const double f2 = profile(0.5 * eps);
  double core = 0.0;
  if (f1 != 0.0 && f2 != 0.0 && (f1 > 0.0) == (f2 > 0.0)) {
    const double p = std::log2(f1 / f2);
    if (p <= -0.999) {
      out.divergent = true;
      out.value = f1 > 0.0 ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
      return out;
    }
    core = eps * f1 / (1.0 + p);
  } else {
    core = 0.5 * eps * (f1 + f2);
  }
  out.value += core;
  return out;
}

QuadratureResult SpectralIntegrator::integrate(const Integrand& g, int freq, double phi_floor,
                                               std::optional<double> rel_tol) const {
  const double tol = rel_tol.value_or(relative_tolerance());
  QuadratureResult prev = integrate_at(options_.min_level, freq, g, phi_floor);
  if (prev.divergent || options_.min_level == options_.max_level) return prev;
  for (int level = options_.min_level + 1; level <= options_.max_level; ++level) {
    QuadratureResult cur = integrate_at(level, freq, g, phi_floor);
    if (cur.divergent) return cur;
    cur.error = std::abs(cur.value - prev.value);
    if (cur.error <= std::max(tol * std::abs(cur.value), options_.abs_tol)) return cur;
    prev = cur;
  }
  std::ostringstream os;
  os << "spectral quadrature did not reach relative tolerance " << tol << " by level "
     << options_.max_level << " (value " << prev.value << ", error estimate " << prev.error << ")";
  throw ConvergenceError(os.str(), prev.value, prev.error);
}

}  // namespace brw
