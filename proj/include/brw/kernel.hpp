#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "brw/tail_symbol.hpp"

namespace brw {

using LatticePoint = std::vector<std::int64_t>;

enum class KernelKind { finite_variance, heavy_tail };

/// How a heavy-tailed kernel treats jumps longer than the truncation radius.
/// `truncated` drops them. `exact` (d = 1 only) keeps the power law for every
/// |z| and represents the part beyond R analytically.
enum class TailMode { truncated, exact };

std::string to_string(KernelKind kind);
std::string to_string(TailMode mode);

/// Direction function H(u) on the unit sphere: a callable, or samples on a
/// direction grid looked up by nearest sample.
class DirectionFunction {
 public:
  using Callable = std::function<double(std::span<const double>)>;

  static DirectionFunction constant(double value);
  static DirectionFunction from_callable(Callable fn);
  static DirectionFunction from_samples(std::vector<std::vector<double>> directions,
                                        std::vector<double> values);

  double operator()(std::span<const double> u) const;
  bool is_constant() const { return constant_.has_value(); }

 private:
  std::optional<double> constant_;
  Callable fn_;
};

struct JumpRate {
  LatticePoint z;
  double rate = 0.0;
};

/// Jump-rate function a(z) of a symmetric, homogeneous, regular walk on Z^d.
class WalkKernel {
 public:
  int dimension() const { return dim_; }
  KernelKind kind() const { return kind_; }
  TailMode tail_mode() const { return tail_mode_; }

  /// Explicit support, all z != 0 with a(z) > 0, both signs present.
  const std::vector<JumpRate>& support() const { return support_; }
  /// a(0) < 0; -a(0) is the total jump rate.
  double diagonal() const { return diag_; }
  double total_rate() const { return -diag_; }
  double rate(const LatticePoint& z) const;

  std::optional<double> tail_alpha() const { return alpha_; }
  int truncation_radius() const { return radius_; }
  /// Overall amplitude c*H for d = 1 heavy tails (H is a constant there).
  double tail_amplitude() const { return amplitude_; }
  /// Total rate carried by jumps with |z| > R (exact tails only, else 0).
  double tail_mass() const { return tail_mass_; }

  /// phi(theta) = sum_z a(z) cos<theta,z>, evaluated as -sum a(z)(1-cos)
  /// so that it stays accurate near theta = 0.
  double symbol(std::span<const double> theta) const;

 private:
  friend WalkKernel build_finite_variance_kernel(int, const std::vector<JumpRate>&);
  friend WalkKernel build_heavy_tail_kernel(int, double, const DirectionFunction&, int, double,
                                            TailMode);

  int dim_ = 1;
  KernelKind kind_ = KernelKind::finite_variance;
  TailMode tail_mode_ = TailMode::truncated;
  std::vector<JumpRate> support_;
  // One representative of each +-z pair, used by symbol().
  std::vector<JumpRate> half_support_;
  double diag_ = 0.0;
  std::optional<double> alpha_;
  int radius_ = 0;
  double amplitude_ = 0.0;
  double tail_mass_ = 0.0;
  std::optional<PowerLawSymbol> tail_symbol_;  // exact d = 1 tail only
};

WalkKernel build_finite_variance_kernel(int d, const std::vector<JumpRate>& weights);

/// Nearest-neighbour kernel with a(+-e_i) = 1/(2d).
WalkKernel build_nearest_neighbor_kernel(int d);

WalkKernel build_heavy_tail_kernel(int d, double alpha, const DirectionFunction& H, int radius,
                                   double scale, TailMode mode = TailMode::truncated);

/// Default truncation radius: 64 for d = 1, 32 for d = 2, 16 otherwise.
int default_truncation_radius(int d);

/// Fourier symbol with the fundamental-cube domain check.
double fourier_symbol(const WalkKernel& k, std::span<const double> theta);

/// True when the vectors generate Z^d as an additive group.
bool generates_lattice(int d, const std::vector<LatticePoint>& vectors);

/// Largest gamma with phi(theta) <= -(gamma/d)|theta|^2 on a grid of
/// `points` per axis over [-pi,pi]^d (origin excluded).
double gaussian_bound(const WalkKernel& k, int points = 65);

struct KernelCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs every kernel invariant; used by `brw kernel-validate`.
std::vector<KernelCheck> check_kernel(const WalkKernel& k);

struct SymbolFit {
  double alpha_hat = 0.0;       // mean fitted slope over directions
  double alpha_used = 0.0;      // exponent used to extract eta
  std::vector<std::vector<double>> directions;
  std::vector<double> slopes;   // per-direction fitted slope
  std::vector<double> eta;      // per-direction eta(u)
  double eta_min = 0.0;
  double eta_max = 0.0;
  std::pair<double, double> fit_window{0.0, 0.0};
  double max_residual = 0.0;    // worst rms residual of the log-log fits

  /// eta at the nearest sampled direction.
  double eta_at(std::span<const double> u) const;
};

struct SymbolFitOptions {
  std::pair<double, double> window{1e-3, 1e-1};
  int samples = 48;
  /// Fixed exponent for extracting eta; defaults to the kernel's tail alpha,
  /// then to the fitted slope.
  std::optional<double> probe_alpha;
  /// Max allowed relative difference between the slopes fitted on the two
  /// halves of the window.
  double asymptotic_tolerance = 0.1;
};

/// Fits phi(r u) ~ -eta(u) r^alpha over the window for each direction.
SymbolFit fit_symbol_tail(const WalkKernel& k, const std::vector<std::vector<double>>& directions,
                          const SymbolFitOptions& options = {});

/// Direction set used when the caller does not supply one.
std::vector<std::vector<double>> default_directions(int d);

}  // namespace brw
