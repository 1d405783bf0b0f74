#include "brw/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "brw/error.hpp"
#include "brw/parallel.hpp"

namespace brw {

namespace {

// exp(-40) relative cut for nodes carrying a factor exp(phi a).
constexpr double kExpCut = 40.0;

// A(x) = int_0^1 v e^{xv} dv and B(x) = int_0^1 (1-v) e^{xv} dv.
double weight_a(double x) {
  if (std::abs(x) < 0.1) {
    // sum_k x^k / (k! (k+2))
    double term = 1.0, sum = 0.0;
    for (int k = 0; k < 12; ++k) {
      sum += term / (k + 2);
      term *= x / (k + 1);
    }
    return sum;
  }
  return (1.0 + std::exp(x) * (x - 1.0)) / (x * x);
}

double weight_b(double x) {
  if (std::abs(x) < 0.1) {
    // sum_k x^k / (k+2)!
    double term = 0.5, sum = 0.0;
    for (int k = 0; k < 12; ++k) {
      sum += term;
      term *= x / (k + 3);
    }
    return sum;
  }
  return (std::exp(x) - 1.0 - x) / (x * x);
}

bool is_origin(const LatticePoint& v) {
  return std::all_of(v.begin(), v.end(), [](auto c) { return c == 0; });
}

struct Equation {
  double g;      // inhomogeneous term at the current node
  double sign;   // +1 for F, -1 for Q and q
  CurveKind kind;
  const BranchingLaw* law;

  double psi(double u) const { return kind == CurveKind::F_laplace ? f_eval(*law, u) : f_eval(*law, 1.0 - u); }
  double dpsi(double u) const {
    return kind == CurveKind::F_laplace ? f_derivative(*law, 1, u) : -f_derivative(*law, 1, 1.0 - u);
  }
};

}  // namespace

std::string to_string(GridScheme s) {
  return s == GridScheme::uniform ? "uniform" : "geometric-after-warmup";
}

std::string to_string(CurveKind k) {
  switch (k) {
    case CurveKind::Q_total: return "Q_total";
    case CurveKind::q_local: return "q_local";
    case CurveKind::F_laplace: return "F_laplace";
  }
  return "?";
}

std::string to_string(AsymptoteModel m) {
  switch (m) {
    case AsymptoteModel::power: return "power";
    case AsymptoteModel::logpower: return "logpower";
    case AsymptoteModel::constant: return "constant";
  }
  return "?";
}

TimeGrid TimeGrid::uniform(double T, double h) {
  if (!(T > 0.0) || !(h > 0.0) || !std::isfinite(T)) throw ValidationError("uniform grid needs T > 0 and h > 0");
  TimeGrid g;
  g.scheme_ = GridScheme::uniform;
  g.h_ = h;
  const auto steps = static_cast<std::size_t>(std::floor(T / h * (1.0 + 1e-12)));
  for (std::size_t k = 0; k <= steps; ++k) g.nodes_.push_back(static_cast<double>(k) * h);
  g.uniform_count_ = g.nodes_.size();
  if (T - g.nodes_.back() > 1e-9 * h) g.nodes_.push_back(T);
  if (g.nodes_.size() < 3) throw ValidationError("grid needs at least two steps");
  return g;
}

TimeGrid TimeGrid::geometric_after_warmup(double T, double h, double t_warm, double ratio) {
  if (!(T > 0.0) || !(h > 0.0) || !(ratio > 1.0) || !(t_warm >= h)) {
    throw ValidationError("geometric grid needs T > 0, h > 0, t_warm >= h and ratio > 1");
  }
  if (T <= t_warm) {
    auto g = uniform(T, h);
    return g;
  }
  TimeGrid g;
  g.scheme_ = GridScheme::geometric_after_warmup;
  g.h_ = h;
  const auto warm_steps = static_cast<std::size_t>(std::llround(t_warm / h));
  for (std::size_t k = 0; k <= warm_steps; ++k) g.nodes_.push_back(static_cast<double>(k) * h);
  g.uniform_count_ = g.nodes_.size();
  double t = g.nodes_.back();
  while (t < T) {
    double next = std::max(t * ratio, t + h);
    // Avoid a sliver at the end.
    if (next > T || T - next < 0.25 * (next - t)) next = T;
    g.nodes_.push_back(next);
    t = next;
  }
  return g;
}

TimeGrid TimeGrid::from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 3) throw ValidationError("grid needs at least two steps");
  if (nodes.front() != 0.0) throw ValidationError("grid must start at t = 0");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) throw ValidationError("grid nodes must increase strictly");
  }
  TimeGrid g;
  g.nodes_ = std::move(nodes);
  g.h_ = g.nodes_[1];
  g.uniform_count_ = 2;
  // Longest exactly uniform prefix.
  while (g.uniform_count_ < g.nodes_.size() &&
         std::abs(g.nodes_[g.uniform_count_] - g.uniform_count_ * g.h_) <= 1e-12 * g.nodes_[g.uniform_count_]) {
    ++g.uniform_count_;
  }
  g.scheme_ = g.uniform_count_ == g.nodes_.size() ? GridScheme::uniform : GridScheme::geometric_after_warmup;
  return g;
}

double SurvivalCurve::value_at(double t) const {
  const auto& n = grid.nodes();
  if (t < 0.0 || t > n.back() * (1.0 + 1e-12)) throw ValidationError("t outside the curve's grid");
  auto it = std::upper_bound(n.begin(), n.end(), t);
  if (it == n.end()) return values.back();
  const std::size_t i = static_cast<std::size_t>(it - n.begin());
  const double w = (t - n[i - 1]) / (n[i] - n[i - 1]);
  return (1.0 - w) * values[i - 1] + w * values[i];
}

struct VolterraSolver::Weights {
  std::size_t uniform_count = 0;
  // Rows i < uniform_count: panel weights depend on m = i - j - 1 only.
  std::vector<double> toeplitz_left, toeplitz_right;
  // Rows i >= uniform_count, row r = i - uniform_count holds j = 0..i-1.
  std::vector<std::vector<double>> row_left, row_right;
  std::vector<double> p;

  double left(std::size_t i, std::size_t j) const {
    return i < uniform_count ? toeplitz_left[i - j - 1] : row_left[i - uniform_count][j];
  }
  double right(std::size_t i, std::size_t j) const {
    return i < uniform_count ? toeplitz_right[i - j - 1] : row_right[i - uniform_count][j];
  }
};

VolterraSolver::VolterraSolver(std::shared_ptr<const SpectralIntegrator> quad, TimeGrid grid,
                               VolterraOptions options)
    : quad_(std::move(quad)), grid_(std::move(grid)), options_(options) {
  if (!quad_) throw ValidationError("solver needs a spectral integrator");
  if (grid_.size() < 3) throw ValidationError("grid needs at least two steps");
  if (options_.quadrature_level) level_ = *options_.quadrature_level;
}

int VolterraSolver::quadrature_level() const {
  if (level_) return *level_;
  // Coarsest level whose p(t) agrees with the next one to kernel_accuracy
  // at a short, a unit and the final time.
  const double probes[] = {grid_[1], std::min(1.0, grid_.horizon()), grid_.horizon()};
  const int top = quad_->options().max_level;
  for (int level = quad_->options().min_level; level < top; ++level) {
    double worst = 0.0;
    for (double t : probes) {
      auto g = [t](std::span<const double>, double phi) { return std::exp(phi * t); };
      const double a = quad_->integrate_at(level, 0, g, -kExpCut / t).value;
      const double b = quad_->integrate_at(level + 1, 0, g, -kExpCut / t).value;
      worst = std::max(worst, std::abs(a - b));
    }
    if (worst <= options_.kernel_accuracy) {
      level_ = level;
      return level;
    }
  }
  level_ = top;
  return top;
}

const VolterraSolver::Weights& VolterraSolver::weights(const LatticePoint& x) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (auto it = cache_.find(x); it != cache_.end()) return *it->second;
  if (static_cast<int>(x.size()) != quad_->kernel().dimension()) {
    throw ValidationError("lattice point dimension does not match the kernel");
  }

  const int level = quadrature_level();
  const auto rule = quad_->rule(level, displacement_frequency(x));
  const int d = rule->dimension();
  const std::size_t nodes = rule->size();
  std::vector<double> cosx(nodes, 1.0);
  if (!is_origin(x)) {
    for (std::size_t n = 0; n < nodes; ++n) {
      const auto th = rule->node(n);
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += th[c] * static_cast<double>(x[c]);
      cosx[n] = std::cos(s);
    }
  }

  auto w = std::make_shared<Weights>();
  const std::size_t M = grid_.size();
  const std::size_t nu = std::min(grid_.uniform_count(), M);
  w->uniform_count = nu;

  // Task list: (a, Delta) pairs plus output slots.
  struct Task {
    double a;
    double delta;
    double* left;
    double* right;
  };
  std::vector<Task> tasks;
  const double h = grid_.step();
  if (nu >= 2) {
    w->toeplitz_left.assign(nu - 1, 0.0);
    w->toeplitz_right.assign(nu - 1, 0.0);
    for (std::size_t m = 0; m + 1 < nu; ++m) {
      tasks.push_back({static_cast<double>(m) * h, h, &w->toeplitz_left[m], &w->toeplitz_right[m]});
    }
  }
  w->row_left.resize(M - nu);
  w->row_right.resize(M - nu);
  for (std::size_t i = nu; i < M; ++i) {
    auto& rl = w->row_left[i - nu];
    auto& rr = w->row_right[i - nu];
    rl.assign(i, 0.0);
    rr.assign(i, 0.0);
    for (std::size_t j = 0; j < i; ++j) {
      tasks.push_back({grid_[i] - grid_[j + 1], grid_[j + 1] - grid_[j], &rl[j], &rr[j]});
    }
  }
  w->p.assign(M, 0.0);

  parallel_blocks(tasks.size(), 16, options_.threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      const Task& t = tasks[k];
      const std::size_t count = t.a > 0.0 ? rule->count_above(-kExpCut / t.a) : nodes;
      double sl = 0.0, sr = 0.0;
      for (std::size_t n = 0; n < count; ++n) {
        const double phi = rule->phi(n);
        const double base = rule->weight(n) * cosx[n] * std::exp(phi * t.a);
        const double xd = phi * t.delta;
        sl += base * weight_a(xd);
        sr += base * weight_b(xd);
      }
      *t.left = sl * t.delta;
      *t.right = sr * t.delta;
    }
  });
  parallel_blocks(M, 8, options_.threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double t = grid_[i];
      if (t == 0.0) {
        w->p[i] = is_origin(x) ? 1.0 : 0.0;
        continue;
      }
      const std::size_t count = rule->count_above(-kExpCut / t);
      double s = 0.0;
      for (std::size_t n = 0; n < count; ++n) s += rule->weight(n) * cosx[n] * std::exp(rule->phi(n) * t);
      w->p[i] = s;
    }
  });

  auto [it, inserted] = cache_.emplace(x, std::move(w));
  return *it->second;
}

const std::vector<double>& VolterraSolver::kernel_values(const LatticePoint& x) { return weights(x).p; }

std::vector<double> VolterraSolver::solve_origin(CurveKind kind, const BranchingLaw& law, double z,
                                                 std::vector<int>& iterations,
                                                 std::vector<double>& residuals) {
  const LatticePoint origin(quad_->kernel().dimension(), 0);
  const Weights& w = weights(origin);
  const std::size_t M = grid_.size();
  Equation eq{0.0, kind == CurveKind::F_laplace ? 1.0 : -1.0, kind, &law};
  const double e = std::exp(-z);
  auto g_at = [&](std::size_t i) {
    switch (kind) {
      case CurveKind::Q_total: return 1.0;
      case CurveKind::q_local: return w.p[i];
      case CurveKind::F_laplace: return e;
    }
    return 1.0;
  };

  std::vector<double> u(M), psi(M);
  iterations.assign(M, 0);
  residuals.assign(M, 0.0);
  u[0] = g_at(0);
  psi[0] = eq.psi(u[0]);
  for (std::size_t i = 1; i < M; ++i) {
    double hist = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      hist += w.left(i, j) * psi[j];
      if (j + 1 < i) hist += w.right(i, j) * psi[j + 1];
    }
    const double wii = w.right(i, i - 1);
    eq.g = g_at(i);
    auto r = [&](double v) { return v - eq.g - eq.sign * (hist + wii * eq.psi(v)); };

    double v = u[i - 1];
    int it = 0;
    bool done = false;
    for (; it < options_.max_iterations; ++it) {
      const double dr = 1.0 - eq.sign * wii * eq.dpsi(v);
      if (dr == 0.0 || !std::isfinite(dr)) break;
      const double step = r(v) / dr;
      v -= step;
      if (!std::isfinite(v)) break;
      if (std::abs(step) < options_.tolerance) {
        done = true;
        ++it;
        break;
      }
    }
    if (!done) {
      // Newton stalled: bracket on a coarse scan and bisect.
      double lo = -0.5, flo = r(lo);
      bool found = false;
      for (int k = 1; k <= 400 && !found; ++k) {
        const double hi = -0.5 + 2.0 * k / 400.0;
        const double fhi = r(hi);
        if ((flo <= 0.0) != (fhi <= 0.0)) {
          double a = lo, b = hi, fa = flo;
          while (b - a > options_.tolerance) {
            const double m = 0.5 * (a + b);
            const double fm = r(m);
            if ((fa <= 0.0) == (fm <= 0.0)) {
              a = m;
              fa = fm;
            } else {
              b = m;
            }
            ++it;
          }
          v = 0.5 * (a + b);
          found = true;
        }
        lo = hi;
        flo = fhi;
      }
      if (!found) {
        std::ostringstream os;
        os << "nonlinear step did not converge at step " << i << " (t = " << grid_[i] << ")";
        throw ConvergenceError(os.str(), v, std::abs(r(v)));
      }
    }
    u[i] = v;
    psi[i] = eq.psi(v);
    iterations[i] = it;
    residuals[i] = std::abs(r(v));
  }
  return u;
}

std::vector<double> VolterraSolver::explicit_curve(CurveKind kind, const BranchingLaw& law, double z,
                                                   const std::vector<double>& origin,
                                                   const LatticePoint& x) {
  const Weights& w = weights(x);
  const std::size_t M = grid_.size();
  Equation eq{0.0, kind == CurveKind::F_laplace ? 1.0 : -1.0, kind, &law};
  std::vector<double> psi(M);
  for (std::size_t i = 0; i < M; ++i) psi[i] = eq.psi(origin[i]);
  const double g = kind == CurveKind::F_laplace ? std::exp(-z) : 1.0;
  std::vector<double> u(M);
  u[0] = g;
  for (std::size_t i = 1; i < M; ++i) {
    double conv = 0.0;
    for (std::size_t j = 0; j < i; ++j) conv += w.left(i, j) * psi[j] + w.right(i, j) * psi[j + 1];
    u[i] = g + eq.sign * conv;
  }
  return u;
}

namespace {

void finish_curve(SurvivalCurve& c, const BranchingLaw& law) {
  const auto& v = c.values;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= -1e-12 && v[i] <= 1.0 + 1e-12)) {
      std::ostringstream os;
      os << to_string(c.kind) << " left [0,1] at t = " << c.grid[i] << " (value " << v[i]
         << "); the grid is too coarse for this configuration";
      throw InvariantError(os.str());
    }
  }
  // Expected direction: -1 non-increasing, +1 non-decreasing, 0 constant.
  int direction = -1;
  if (c.kind == CurveKind::F_laplace) {
    const double fe = f_eval(law, std::exp(-c.z));
    direction = fe > 0.0 ? 1 : (fe < 0.0 ? -1 : 0);
  }
  double worst = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double step = v[i] - v[i - 1];
    if (direction <= 0) worst = std::max(worst, step);
    if (direction >= 0) worst = std::max(worst, -step);
  }
  c.monotonicity_violation = worst;
  if (c.kind == CurveKind::Q_total && worst > 1e-9) {
    std::ostringstream os;
    os << "Q(t) increased by " << worst << " between grid nodes";
    throw InvariantError(os.str());
  }
}

}  // namespace

SurvivalCurve VolterraSolver::solve_Q_total(const BranchingLaw& law, const LatticePoint& x) {
  SurvivalCurve c;
  c.grid = grid_;
  c.kind = CurveKind::Q_total;
  c.x = x;
  c.quadrature_level = quadrature_level();
  auto origin = solve_origin(CurveKind::Q_total, law, 0.0, c.iterations, c.residuals);
  c.values = is_origin(x) ? std::move(origin) : explicit_curve(CurveKind::Q_total, law, 0.0, origin, x);
  finish_curve(c, law);
  return c;
}

SurvivalCurve VolterraSolver::solve_q_local(const BranchingLaw& law) {
  SurvivalCurve c;
  c.grid = grid_;
  c.kind = CurveKind::q_local;
  c.x = LatticePoint(quad_->kernel().dimension(), 0);
  c.quadrature_level = quadrature_level();
  c.values = solve_origin(CurveKind::q_local, law, 0.0, c.iterations, c.residuals);
  finish_curve(c, law);
  return c;
}

SurvivalCurve VolterraSolver::solve_F(const BranchingLaw& law, double z, const LatticePoint& x) {
  if (!(z >= 0.0) || !std::isfinite(z)) throw ValidationError("z must be finite and >= 0");
  SurvivalCurve c;
  c.grid = grid_;
  c.kind = CurveKind::F_laplace;
  c.z = z;
  c.x = x;
  c.quadrature_level = quadrature_level();
  auto origin = solve_origin(CurveKind::F_laplace, law, z, c.iterations, c.residuals);
  c.values = is_origin(x) ? std::move(origin) : explicit_curve(CurveKind::F_laplace, law, z, origin, x);
  finish_curve(c, law);
  return c;
}

SurvivalCurve solve_Q_total(const WalkKernel& k, const BranchingLaw& law, const TimeGrid& grid,
                            const LatticePoint& x, const VolterraOptions& options) {
  VolterraSolver s(std::make_shared<SpectralIntegrator>(k), grid, options);
  return s.solve_Q_total(law, x);
}

SurvivalCurve solve_q_local(const WalkKernel& k, const BranchingLaw& law, const TimeGrid& grid,
                            const VolterraOptions& options) {
  VolterraSolver s(std::make_shared<SpectralIntegrator>(k), grid, options);
  return s.solve_q_local(law);
}

SurvivalCurve solve_F(const WalkKernel& k, const BranchingLaw& law, double z, const TimeGrid& grid,
                      const LatticePoint& x, const VolterraOptions& options) {
  VolterraSolver s(std::make_shared<SpectralIntegrator>(k), grid, options);
  return s.solve_F(law, z, x);
}

AsymptoteFit fit_asymptote(const SurvivalCurve& curve, AsymptoteModel model,
                           std::pair<double, double> window) {
  const auto [lo, hi] = window;
  if (!(hi > lo)) throw ValidationError("fit window must satisfy t_lo < t_hi");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    const double t = curve.grid[i];
    if (t < lo * (1.0 - 1e-9) || t > hi * (1.0 + 1e-9)) continue;
    const double v = curve.values[i];
    if (model == AsymptoteModel::constant) {
      xs.push_back(t);
      ys.push_back(v);
      continue;
    }
    if (!(v > 0.0)) throw ValidationError("non-positive value inside the fit window");
    if (model == AsymptoteModel::logpower) {
      if (!(t > 1.0)) throw ValidationError("logpower fit needs t > 1");
      xs.push_back(std::log(std::log(t)));
    } else {
      if (!(t > 0.0)) throw ValidationError("power fit needs t > 0");
      xs.push_back(std::log(t));
    }
    ys.push_back(std::log(v));
  }
  if (xs.size() < 8) {
    throw ValidationError("fit window holds " + std::to_string(xs.size()) + " nodes (need at least 8)");
  }
  AsymptoteFit fit;
  fit.model = model;
  fit.nodes = xs.size();
  fit.window = window;
  const double n = static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  if (model == AsymptoteModel::constant) {
    fit.amplitude = my;
    double ss = 0.0;
    for (double y : ys) ss += (y - my) * (y - my);
    fit.residual = std::sqrt(ss / n);
    return fit;
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.exponent = sxy / sxx;
  const double c = my - fit.exponent * mx;
  fit.amplitude = std::exp(c);
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (c + fit.exponent * xs[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

std::vector<AsymptoteFit> sliding_power_fits(const SurvivalCurve& curve,
                                             std::pair<double, double> window, double shift) {
  if (!(shift > 1.0)) throw ValidationError("window shift factor must exceed 1");
  std::vector<AsymptoteFit> fits;
  auto [lo, hi] = window;
  while (hi <= curve.grid.horizon() * (1.0 + 1e-9)) {
    fits.push_back(fit_asymptote(curve, AsymptoteModel::power, {lo, hi}));
    lo *= shift;
    hi *= shift;
  }
  return fits;
}

}  // namespace brw
