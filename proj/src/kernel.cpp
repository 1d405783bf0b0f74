#include "brw/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "brw/error.hpp"
namespace brw {

namespace {

constexpr double kPi = std::numbers::pi;

double norm(const LatticePoint& z) {
  double s = 0.0;
  for (auto c : z) s += static_cast<double>(c) * static_cast<double>(c);
  return std::sqrt(s);
}

bool is_zero(const LatticePoint& z) {
  return std::all_of(z.begin(), z.end(), [](auto c) { return c == 0; });
}

LatticePoint negate(LatticePoint z) {
  for (auto& c : z) c = -c;
  return z;
}

// Canonical representative of {z, -z}: first nonzero coordinate positive.
bool is_canonical(const LatticePoint& z) {
  for (auto c : z) {
    if (c != 0) return c > 0;
  }
  return false;
}

std::string format_point(const LatticePoint& z) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < z.size(); ++i) os << (i ? "," : "") << z[i];
  os << ')';
  return os.str();
}

void sort_support(std::vector<JumpRate>& s) {
  std::sort(s.begin(), s.end(), [](const JumpRate& a, const JumpRate& b) { return a.z < b.z; });
}

// Sum of rates from the smallest term up, so that diag is reproducible.
double ordered_rate_sum(const std::vector<JumpRate>& s) {
  std::vector<double> r;
  r.reserve(s.size());
  for (const auto& j : s) r.push_back(j.rate);
  std::sort(r.begin(), r.end());
  double total = 0.0;
  for (double x : r) total += x;
  return total;
}

std::vector<JumpRate> half_of(const std::vector<JumpRate>& s) {
  std::vector<JumpRate> h;
  for (const auto& j : s) {
    if (is_canonical(j.z)) h.push_back(j);
  }
  return h;
}

std::vector<LatticePoint> support_vectors(const std::vector<JumpRate>& s) {
  std::vector<LatticePoint> v;
  v.reserve(s.size());
  for (const auto& j : s) v.push_back(j.z);
  return v;
}

}  // namespace

std::string to_string(KernelKind kind) {
  return kind == KernelKind::finite_variance ? "finite-variance" : "heavy-tail";
}

std::string to_string(TailMode mode) { return mode == TailMode::exact ? "exact" : "truncated"; }

DirectionFunction DirectionFunction::constant(double value) {
  DirectionFunction f;
  f.constant_ = value;
  return f;
}

DirectionFunction DirectionFunction::from_callable(Callable fn) {
  DirectionFunction f;
  f.fn_ = std::move(fn);
  return f;
}

DirectionFunction DirectionFunction::from_samples(std::vector<std::vector<double>> directions,
                                                  std::vector<double> values) {
  if (directions.empty() || directions.size() != values.size()) {
    throw ValidationError("direction table needs one value per direction");
  }
  for (auto& u : directions) {
    double n = 0.0;
    for (double c : u) n += c * c;
    n = std::sqrt(n);
    if (n == 0.0) throw ValidationError("direction table contains a zero vector");
    for (double& c : u) c /= n;
  }
  DirectionFunction f;
  f.fn_ = [dirs = std::move(directions), vals = std::move(values)](std::span<const double> u) {
    std::size_t best = 0;
    double best_dot = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      if (dirs[i].size() != u.size()) throw ValidationError("direction table dimension mismatch");
      double dot = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k) dot += dirs[i][k] * u[k];
      if (dot > best_dot) {
        best_dot = dot;
        best = i;
      }
    }
    return vals[best];
  };
  return f;
}

double DirectionFunction::operator()(std::span<const double> u) const {
  if (constant_) return *constant_;
  if (!fn_) throw ValidationError("direction function is empty");
  return fn_(u);
}

double WalkKernel::rate(const LatticePoint& z) const {
  if (static_cast<int>(z.size()) != dim_) throw ValidationError("lattice point dimension mismatch");
  if (is_zero(z)) return diag_;
  auto it = std::lower_bound(support_.begin(), support_.end(), z,
                             [](const JumpRate& a, const LatticePoint& b) { return a.z < b; });
  if (it != support_.end() && it->z == z) return it->rate;
  if (tail_mode_ == TailMode::exact && alpha_) {
    return amplitude_ / std::pow(norm(z), 1.0 + *alpha_);
  }
  return 0.0;
}

double WalkKernel::symbol(std::span<const double> theta) const {
  if (tail_symbol_) return -2.0 * amplitude_ * (*tail_symbol_)(theta[0]);
  double acc = 0.0;
  for (const auto& j : half_support_) {
    double dot = 0.0;
    for (int i = 0; i < dim_; ++i) dot += theta[i] * static_cast<double>(j.z[i]);
    const double s = std::sin(0.5 * dot);
    acc += j.rate * s * s;
  }
  return -4.0 * acc;
}

WalkKernel build_finite_variance_kernel(int d, const std::vector<JumpRate>& weights) {
  if (d < 1) throw ValidationError("dimension must be >= 1");
  std::vector<JumpRate> support;
  for (const auto& w : weights) {
    if (static_cast<int>(w.z.size()) != d) {
      throw ValidationError("weight vector " + format_point(w.z) + " has wrong dimension");
    }
    if (is_zero(w.z)) throw ValidationError("weights must not include z = 0 (a(0) is derived)");
    if (!std::isfinite(w.rate) || w.rate < 0.0) {
      throw ValidationError("nonnegativity violated: a" + format_point(w.z) + " < 0");
    }
    if (w.rate > 0.0) support.push_back(w);
  }
  if (support.empty()) throw ValidationError("empty support: kernel needs at least one jump");
  sort_support(support);
  for (std::size_t i = 1; i < support.size(); ++i) {
    if (support[i].z == support[i - 1].z) {
      throw ValidationError("duplicate weight for " + format_point(support[i].z));
    }
  }
  for (const auto& j : support) {
    const auto mz = negate(j.z);
    auto it = std::lower_bound(support.begin(), support.end(), mz,
                               [](const JumpRate& a, const LatticePoint& b) { return a.z < b; });
    if (it == support.end() || it->z != mz) {
      throw ValidationError("symmetry violated: a" + format_point(j.z) + " has no matching a" +
                            format_point(mz));
    }
    if (std::abs(it->rate - j.rate) > 1e-12 * std::max(it->rate, j.rate)) {
      throw ValidationError("symmetry violated: a" + format_point(j.z) + " != a" + format_point(mz));
    }
  }
  if (!generates_lattice(d, support_vectors(support))) {
    throw ValidationError("irreducibility violated: support does not generate Z^" +
                          std::to_string(d));
  }
  WalkKernel k;
  k.dim_ = d;
  k.kind_ = KernelKind::finite_variance;
  k.support_ = std::move(support);
  k.half_support_ = half_of(k.support_);
  k.diag_ = -ordered_rate_sum(k.support_);
  return k;
}

WalkKernel build_nearest_neighbor_kernel(int d) {
  std::vector<JumpRate> w;
  for (int i = 0; i < d; ++i) {
    for (int sgn : {1, -1}) {
      LatticePoint z(d, 0);
      z[i] = sgn;
      w.push_back({z, 1.0 / (2.0 * d)});
    }
  }
  return build_finite_variance_kernel(d, w);
}

int default_truncation_radius(int d) { return d == 1 ? 64 : (d == 2 ? 32 : 16); }

WalkKernel build_heavy_tail_kernel(int d, double alpha, const DirectionFunction& H, int radius,
                                   double scale, TailMode mode) {
  if (d < 1) throw ValidationError("dimension must be >= 1");
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw ValidationError("tail exponent alpha must lie in the open interval (0,2)");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("scale c must be positive");
  if (radius < 1) throw ValidationError("truncation radius too small: support fails irreducibility");
  if (mode == TailMode::exact && d != 1) {
    throw ValidationError("exact tails are only available for d = 1");
  }
  std::vector<JumpRate> support;
  LatticePoint z(d, -radius);
  const double r2max = static_cast<double>(radius) * radius;
  // Odometer over the cube [-R,R]^d, keeping the Euclidean ball.
  while (true) {
    double r2 = 0.0;
    for (auto c : z) r2 += static_cast<double>(c) * c;
    if (r2 > 0.0 && r2 <= r2max) {
      const double r = std::sqrt(r2);
      std::vector<double> u(d);
      std::vector<double> mu(d);
      for (int i = 0; i < d; ++i) {
        u[i] = static_cast<double>(z[i]) / r;
        mu[i] = -u[i];
      }
      const double h = H(u);
      if (!(h > 0.0) || !std::isfinite(h)) {
        throw ValidationError("direction function H must be strictly positive, H" +
                              format_point(z) + " = " + std::to_string(h));
      }
      const double hm = H(mu);
      if (std::abs(h - hm) > 1e-12 * std::max(h, hm)) {
        throw ValidationError("direction function H is not symmetric at " + format_point(z));
      }
      support.push_back({z, scale * h / std::pow(r, d + alpha)});
    }
    int i = 0;
    while (i < d && z[i] == radius) z[i++] = -radius;
    if (i == d) break;
    ++z[i];
  }
  sort_support(support);
  if (!generates_lattice(d, support_vectors(support))) {
    throw ValidationError("truncation radius too small: support fails irreducibility");
  }
  WalkKernel k;
  k.dim_ = d;
  k.kind_ = KernelKind::heavy_tail;
  k.tail_mode_ = mode;
  k.alpha_ = alpha;
  k.radius_ = radius;
  k.support_ = std::move(support);
  k.half_support_ = half_of(k.support_);
  if (d == 1) k.amplitude_ = scale * H(std::vector<double>{1.0});
  double explicit_sum = ordered_rate_sum(k.support_);
  if (mode == TailMode::exact) {
    k.tail_mass_ = 2.0 * k.amplitude_ * power_law_tail_sum(1.0 + alpha, radius);
    k.tail_symbol_.emplace(1.0 + alpha);
    k.diag_ = -(explicit_sum + k.tail_mass_);
  } else {
    k.diag_ = -explicit_sum;
  }
  return k;
}

double fourier_symbol(const WalkKernel& k, std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != k.dimension()) {
    throw ValidationError("theta dimension mismatch");
  }
  for (double t : theta) {
    if (!(std::abs(t) <= kPi * (1.0 + 1e-12))) {
      throw ValidationError("theta outside the fundamental cube [-pi,pi]^d");
    }
  }
  return k.symbol(theta);
}

bool generates_lattice(int d, const std::vector<LatticePoint>& vectors) {
  using Row = std::vector<long long>;
  std::vector<Row> basis(d);

  auto reduce_all = [&] {
    for (int r = d - 1; r >= 0; --r) {
      if (basis[r].empty()) continue;
      for (int j = r + 1; j < d; ++j) {
        if (basis[j].empty()) continue;
        const long long p = basis[j][j];
        long long q = basis[r][j] / p;
        if (basis[r][j] - q * p < 0) --q;
        if (q == 0) continue;
        for (int c = j; c < d; ++c) basis[r][c] -= q * basis[j][c];
      }
    }
  };
  auto complete = [&] {
    for (int c = 0; c < d; ++c) {
      if (basis[c].empty() || basis[c][c] != 1) return false;
    }
    return true;
  };

  for (const auto& vec : vectors) {
    if (static_cast<int>(vec.size()) != d) return false;
    Row v(vec.begin(), vec.end());
    for (int c = 0; c < d; ++c) {
      if (v[c] == 0) continue;
      if (basis[c].empty()) {
        if (v[c] < 0) {
          for (auto& x : v) x = -x;
        }
        basis[c] = v;
        break;
      }
      Row& b = basis[c];
      // Extended Euclid on (b[c], v[c]).
      long long a = b[c], e = v[c];
      long long old_r = a, r = e, old_s = 1, s = 0, old_t = 0, t = 1;
      while (r != 0) {
        const long long q = old_r / r;
        std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
        std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
        std::tie(old_t, t) = std::make_pair(t, old_t - q * t);
      }
      long long g = old_r, sa = old_s, tb = old_t;
      if (g < 0) {
        g = -g;
        sa = -sa;
        tb = -tb;
      }
      Row nb(d), nv(d);
      for (int k = 0; k < d; ++k) {
        nb[k] = sa * b[k] + tb * v[k];
        nv[k] = (e / g) * b[k] - (a / g) * v[k];
      }
      b = std::move(nb);
      v = std::move(nv);
    }
    reduce_all();
    if (complete()) return true;
  }
  return complete();
}

double gaussian_bound(const WalkKernel& k, int points) {
  const int d = k.dimension();
  if (points < 3) points = 3;
  if (points % 2 == 0) ++points;
  std::vector<int> idx(d, 0);
  std::vector<double> theta(d);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
      theta[i] = -kPi + 2.0 * kPi * idx[i] / (points - 1);
      r2 += theta[i] * theta[i];
    }
    if (r2 > 1e-24) best = std::min(best, -k.symbol(theta) * d / r2);
    int i = 0;
    while (i < d && idx[i] == points - 1) idx[i++] = 0;
    if (i == d) break;
    ++idx[i];
  }
  return best;
}

std::vector<KernelCheck> check_kernel(const WalkKernel& k) {
  std::vector<KernelCheck> out;
  const int d = k.dimension();
  const auto& s = k.support();

  {
    bool ok = true;
    std::string detail = "a(z) = a(-z) on " + std::to_string(s.size()) + " support vectors";
    for (const auto& j : s) {
      const double back = k.rate(negate(j.z));
      if (std::abs(back - j.rate) > 1e-12 * j.rate) {
        ok = false;
        detail = "a" + format_point(j.z) + " != a(-z)";
        break;
      }
    }
    out.push_back({"symmetry", ok, detail});
  }
  {
    bool ok = k.diagonal() < 0.0;
    for (const auto& j : s) ok = ok && j.rate >= 0.0;
    out.push_back({"nonnegativity", ok, "a(z) >= 0 off the diagonal, a(0) = " +
                                            std::to_string(k.diagonal())});
  }
  {
    const double residual = k.diagonal() + ordered_rate_sum(s) + k.tail_mass();
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(k.diagonal());
    std::ostringstream os;
    os << "a(0) + sum a(z) = " << residual;
    out.push_back({"regularity", std::abs(residual) <= tol, os.str()});
  }
  out.push_back({"irreducibility", generates_lattice(d, support_vectors(s)),
                 "support generates Z^" + std::to_string(d)});
  if (k.tail_alpha()) {
    // Along each axis H is fixed, so a(k e_i) k^{d+alpha} must not depend on k.
    const double alpha = *k.tail_alpha();
    const int R = k.truncation_radius();
    double worst = 0.0;
    for (int axis = 0; axis < d; ++axis) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (int step = 1; step <= R; ++step) {
        LatticePoint z(d, 0);
        z[axis] = step;
        const double v = k.rate(z) * std::pow(static_cast<double>(step), d + alpha);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      worst = std::max(worst, (hi - lo) / hi);
    }
    std::ostringstream os;
    os << "relative spread of a(z)|z|^{d+alpha} along the axes = " << worst;
    out.push_back({"tail-shape", worst <= 1e-12, os.str()});
  }
  {
    const int n = d == 1 ? 257 : (d == 2 ? 65 : 17);
    bool ok = true;
    std::vector<int> idx(d, 0);
    std::vector<double> theta(d);
    double worst = -std::numeric_limits<double>::infinity();
    while (true) {
      bool origin = true;
      for (int i = 0; i < d; ++i) {
        theta[i] = -kPi + 2.0 * kPi * idx[i] / (n - 1);
        origin = origin && idx[i] == (n - 1) / 2;
      }
      const double phi = k.symbol(theta);
      if (!origin) {
        worst = std::max(worst, phi);
        ok = ok && phi < 0.0;
      }
      int i = 0;
      while (i < d && idx[i] == n - 1) idx[i++] = 0;
      if (i == d) break;
      ++idx[i];
    }
    std::ostringstream os;
    os << "max phi off the origin = " << worst;
    out.push_back({"symbol-sign", ok, os.str()});
  }
  {
    const double gamma = gaussian_bound(k, d == 1 ? 1025 : (d == 2 ? 129 : 25));
    std::ostringstream os;
    os << "phi(theta) <= -(gamma/d)|theta|^2 with gamma = " << gamma;
    out.push_back({"gaussian-bound", gamma > 0.0, os.str()});
  }
  return out;
}

double SymbolFit::eta_at(std::span<const double> u) const {
  std::size_t best = 0;
  double best_dot = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < directions.size(); ++i) {
    double dot = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) dot += directions[i][k] * u[k];
    if (dot > best_dot) {
      best_dot = dot;
      best = i;
    }
  }
  return eta.at(best);
}

std::vector<std::vector<double>> default_directions(int d) {
  std::vector<std::vector<double>> dirs;
  if (d == 1) return {{1.0}, {-1.0}};
  if (d == 2) {
    for (int i = 0; i < 16; ++i) {
      const double a = 2.0 * kPi * i / 16.0;
      dirs.push_back({std::cos(a), std::sin(a)});
    }
    return dirs;
  }
  // Normalised lattice directions with coordinates in {-1,0,1}, at most two
  // nonzero beyond d = 3.
  std::vector<int> idx(d, -1);
  while (true) {
    int nz = 0;
    for (int c : idx) nz += c != 0;
    if (nz > 0 && (d == 3 || nz <= 2)) {
      std::vector<double> u(idx.begin(), idx.end());
      const double n = std::sqrt(static_cast<double>(nz));
      for (double& c : u) c /= n;
      dirs.push_back(u);
    }
    int i = 0;
    while (i < d && idx[i] == 1) idx[i++] = -1;
    if (i == d) break;
    ++idx[i];
  }
  return dirs;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

}  // namespace

SymbolFit fit_symbol_tail(const WalkKernel& k, const std::vector<std::vector<double>>& directions,
                          const SymbolFitOptions& options) {
  const int d = k.dimension();
  const auto [lo, hi] = options.window;
  if (!(lo > 0.0 && hi < kPi && lo < hi)) throw ValidationError("fit window must lie inside (0, pi)");
  if (hi / lo < 2.0) throw ValidationError("fit window too narrow (needs at least a factor 2)");
  if (options.samples < 8) throw ValidationError("fit needs at least 8 samples");
  if (directions.empty()) throw ValidationError("fit needs at least one direction");

  SymbolFit fit;
  fit.fit_window = options.window;
  const int n = options.samples;
  std::vector<double> logr(n), logphi(n);
  std::vector<double> intercept_data;
  for (const auto& raw : directions) {
    if (static_cast<int>(raw.size()) != d) throw ValidationError("direction dimension mismatch");
    std::vector<double> u = raw;
    double un = 0.0;
    for (double c : u) un += c * c;
    un = std::sqrt(un);
    if (un == 0.0) throw ValidationError("zero direction in symbol fit");
    for (double& c : u) c /= un;
    std::vector<double> theta(d);
    for (int i = 0; i < n; ++i) {
      const double r = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
      for (int c = 0; c < d; ++c) theta[c] = r * u[c];
      const double v = -k.symbol(theta);
      if (!(v > 0.0)) throw Error("symbol fit failed: -phi vanishes inside the window");
      logr[i] = std::log(r);
      logphi[i] = std::log(v);
    }
    const auto full = least_squares(logr, logphi);
    const int half = n / 2;
    const auto first = least_squares(std::span(logr).first(half), std::span(logphi).first(half));
    const auto second = least_squares(std::span(logr).subspan(half), std::span(logphi).subspan(half));
    if (std::abs(first.slope - second.slope) > options.asymptotic_tolerance * std::abs(full.slope)) {
      std::ostringstream os;
      os << "window not asymptotic: slope " << first.slope << " on the lower half vs "
         << second.slope << " on the upper half";
      throw Error(os.str());
    }
    fit.directions.push_back(u);
    fit.slopes.push_back(full.slope);
    fit.max_residual = std::max(fit.max_residual, full.rms);
  }
  fit.alpha_hat = std::accumulate(fit.slopes.begin(), fit.slopes.end(), 0.0) / fit.slopes.size();
  fit.alpha_used = options.probe_alpha.value_or(k.tail_alpha().value_or(fit.alpha_hat));

  for (const auto& u : fit.directions) {
    std::vector<double> theta(d);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
      for (int c = 0; c < d; ++c) theta[c] = r * u[c];
      acc += std::log(-k.symbol(theta)) - fit.alpha_used * std::log(r);
    }
    fit.eta.push_back(std::exp(acc / n));
  }
  fit.eta_min = *std::min_element(fit.eta.begin(), fit.eta.end());
  fit.eta_max = *std::max_element(fit.eta.begin(), fit.eta.end());
  return fit;
}

}  // namespace brw
