#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "brw/kernel.hpp"

namespace brw {

/// Gauss-Legendre nodes and weights on [-1, 1]. Orders are restricted to the
/// ones the rule ladder uses.
std::vector<std::pair<double, double>> gauss_legendre(int order);

struct QuadratureOptions {
  double rel_tol = 0.0;  // 0 selects default_relative_tolerance(d)
  double abs_tol = 1e-15;
  int min_level = 0;
  int max_level = 5;
  unsigned threads = 0;
};

/// 1e-6 for d <= 2, 1e-4 above.
double default_relative_tolerance(int d);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int level = 0;
  bool divergent = false;
  std::size_t nodes = 0;
};

/// Fixed quadrature rule for (2pi)^{-d} times an integral over [-pi,pi]^d.
///
/// A ball of radius rho around the origin is covered in polar coordinates
/// with geometrically shrinking radial panels, the rest of the cube by the
/// periodic trapezoid rule. A smooth radial partition of unity glues the two,
/// so both parts see smooth integrands. The innermost core [0, eps] is added
/// analytically from the local radial power law.
class SpectralRule {
 public:
  int dimension() const { return dim_; }
  std::size_t size() const { return weight_.size(); }
  std::span<const double> node(std::size_t i) const {
    return {theta_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  double weight(std::size_t i) const { return weight_[i]; }
  /// Symbol at node i. Nodes are sorted by decreasing phi, i.e. outward.
  double phi(std::size_t i) const { return phi_[i]; }
  /// Number of leading nodes with phi >= floor.
  std::size_t count_above(double phi_floor) const;

  double core_radius() const { return core_radius_; }
  /// Unit directions and weights of the sphere rule used for the core,
  /// already scaled by (2pi)^{-d}.
  std::span<const double> core_directions() const { return core_dirs_; }
  std::span<const double> core_weights() const { return core_weights_; }

 private:
  friend class SpectralIntegrator;
  int dim_ = 1;
  std::vector<double> theta_;
  std::vector<double> weight_;
  std::vector<double> phi_;
  double core_radius_ = 0.0;
  std::vector<double> core_dirs_;
  std::vector<double> core_weights_;
};

/// Integrates g(theta, phi(theta)) against (2pi)^{-d} dtheta over the torus
/// with level-by-level refinement. Rules are built lazily and cached; the
/// integrator is safe to share between threads.
class SpectralIntegrator {
 public:
  using Integrand = std::function<double(std::span<const double>, double)>;

  explicit SpectralIntegrator(WalkKernel kernel, QuadratureOptions options = {});

  const WalkKernel& kernel() const { return kernel_; }
  const QuadratureOptions& options() const { return options_; }
  double relative_tolerance() const;

  /// Rule at a refinement level, resolving oscillations up to |x| = freq.
  std::shared_ptr<const SpectralRule> rule(int level, int freq = 0) const;

  /// One fixed-rule evaluation. Nodes with phi < phi_floor are skipped
  /// (callers use this when g carries a factor exp(phi t)).
  QuadratureResult integrate_at(int level, int freq, const Integrand& g,
                                double phi_floor = -std::numeric_limits<double>::infinity()) const;

  /// Refines until two consecutive levels agree to the tolerance; throws
  /// ConvergenceError with the last value otherwise. A divergent core
  /// (radial power <= -1) returns immediately with divergent = true.
  QuadratureResult integrate(const Integrand& g, int freq = 0,
                             double phi_floor = -std::numeric_limits<double>::infinity(),
                             std::optional<double> rel_tol = std::nullopt) const;

 private:
  std::shared_ptr<const SpectralRule> build_rule(int level, int freq) const;

  WalkKernel kernel_;
  QuadratureOptions options_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, int>, std::shared_ptr<const SpectralRule>> cache_;
};

/// Quadrature on the unit sphere S^{d-1}: flattened unit directions and
/// weights summing to the surface area. `boost` adds resolution.
std::pair<std::vector<double>, std::vector<double>> sphere_quadrature(int d, int level, int boost = 0);

/// Oscillation scale of cos<theta, v>: ceil(|v|).
int displacement_frequency(const LatticePoint& v);

}  // namespace brw
