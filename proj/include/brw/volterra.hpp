#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brw/branching.hpp"
#include "brw/kernel.hpp"
#include "brw/quadrature.hpp"

namespace brw {

enum class GridScheme { uniform, geometric_after_warmup };
std::string to_string(GridScheme s);

class TimeGrid {
 public:
  /// 0, h, 2h, ..., T (the last step is shortened if h does not divide T).
  static TimeGrid uniform(double T, double h);
  /// Uniform step h up to t_warm, then t_{k+1} = ratio * t_k up to T.
  static TimeGrid geometric_after_warmup(double T, double h = 0.05, double t_warm = 10.0,
                                         double ratio = 1.1);
  /// Arbitrary nodes; must start at 0 and increase strictly.
  static TimeGrid from_nodes(std::vector<double> nodes);

  const std::vector<double>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  double horizon() const { return nodes_.back(); }
  GridScheme scheme() const { return scheme_; }
  double step() const { return h_; }
  /// Nodes 0..uniform_count()-1 are spaced exactly by step().
  std::size_t uniform_count() const { return uniform_count_; }

 private:
  std::vector<double> nodes_;
  GridScheme scheme_ = GridScheme::uniform;
  double h_ = 0.0;
  std::size_t uniform_count_ = 0;
};

enum class CurveKind { Q_total, q_local, F_laplace };
std::string to_string(CurveKind k);

struct SurvivalCurve {
  TimeGrid grid;
  std::vector<double> values;
  CurveKind kind = CurveKind::Q_total;
  double z = 0.0;  // F_laplace only
  LatticePoint x;
  std::vector<int> iterations;    // per-step nonlinear iterations (x = 0 solve)
  std::vector<double> residuals;  // per-step final residual
  int quadrature_level = 0;
  /// Largest step against the expected monotone direction (0 when monotone).
  double monotonicity_violation = 0.0;

  /// Linear interpolation between grid nodes.
  double value_at(double t) const;
};

struct VolterraOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
  /// Absolute accuracy asked of p(t) when choosing the quadrature level.
  double kernel_accuracy = 1e-8;
  /// Forces a quadrature level instead of choosing one.
  std::optional<int> quadrature_level;
  unsigned threads = 0;
};

/// Product-trapezoidal solver for u(t) = g(t) + s * int_0^t p(t-s,x,0) psi(u(s)) ds.
/// The kernel p is integrated exactly against the piecewise-linear
/// interpolant of psi; the panel weights come straight from the spectral
/// representation, so nothing is differenced. Weight tables are cached per x
/// and shared between solves on the same grid.
class VolterraSolver {
 public:
  VolterraSolver(std::shared_ptr<const SpectralIntegrator> quad, TimeGrid grid,
                 VolterraOptions options = {});

  const TimeGrid& grid() const { return grid_; }
  int quadrature_level() const;

  SurvivalCurve solve_Q_total(const BranchingLaw& law, const LatticePoint& x);
  SurvivalCurve solve_q_local(const BranchingLaw& law);
  SurvivalCurve solve_F(const BranchingLaw& law, double z, const LatticePoint& x);

  /// p(t_i, x, 0) on the grid at the solver's quadrature level.
  const std::vector<double>& kernel_values(const LatticePoint& x);

 private:
  struct Weights;
  const Weights& weights(const LatticePoint& x);
  std::vector<double> solve_origin(CurveKind kind, const BranchingLaw& law, double z,
                                   std::vector<int>& iterations, std::vector<double>& residuals);
  std::vector<double> explicit_curve(CurveKind kind, const BranchingLaw& law, double z,
                                     const std::vector<double>& origin, const LatticePoint& x);

  std::shared_ptr<const SpectralIntegrator> quad_;
  TimeGrid grid_;
  VolterraOptions options_;
  mutable std::optional<int> level_;
  std::mutex mutex_;
  std::map<LatticePoint, std::shared_ptr<Weights>> cache_;
};

SurvivalCurve solve_Q_total(const WalkKernel& k, const BranchingLaw& law, const TimeGrid& grid,
                            const LatticePoint& x, const VolterraOptions& options = {});
SurvivalCurve solve_q_local(const WalkKernel& k, const BranchingLaw& law, const TimeGrid& grid,
                            const VolterraOptions& options = {});
SurvivalCurve solve_F(const WalkKernel& k, const BranchingLaw& law, double z, const TimeGrid& grid,
                      const LatticePoint& x, const VolterraOptions& options = {});

enum class AsymptoteModel { power, logpower, constant };
std::string to_string(AsymptoteModel m);

struct AsymptoteFit {
  AsymptoteModel model = AsymptoteModel::power;
  double exponent = 0.0;   // p (0 for constant)
  double amplitude = 0.0;  // A in Q ~ A t^p, A (ln t)^p, or the plateau
  double residual = 0.0;   // rms residual (log scale for power models)
  std::size_t nodes = 0;
  std::pair<double, double> window{0.0, 0.0};
};

/// Least-squares fit over the grid nodes with t in [t_lo, t_hi].
AsymptoteFit fit_asymptote(const SurvivalCurve& curve, AsymptoteModel model,
                           std::pair<double, double> window);

/// Power-law slopes over windows [t_lo * r^k, t_hi * r^k] sliding right while
/// they stay inside the curve. Used to judge whether a slope drifts toward a
/// target.
std::vector<AsymptoteFit> sliding_power_fits(const SurvivalCurve& curve,
                                             std::pair<double, double> window, double shift);

}  // namespace brw
