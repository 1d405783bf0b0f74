#pragma once

#include <optional>
#include <string>
#include <vector>

#include "brw/kernel.hpp"

namespace brw {

/// Infinitesimal generating function f(u) = sum_n b_n u^n at the source.
class BranchingLaw {
 public:
  /// b[n] is the rate for n offspring. Validates b_1 < 0, b_n >= 0 (n != 1)
  /// and sum b_n = 0 up to rounding.
  explicit BranchingLaw(std::vector<double> b);

  const std::vector<double>& coefficients() const { return b_; }
  int max_offspring() const { return static_cast<int>(b_.size()) - 1; }
  double b(int n) const { return n >= 0 && n < static_cast<int>(b_.size()) ? b_[n] : 0.0; }
  /// -b_1, total branching rate.
  double rate() const { return -b_[1]; }

 private:
  std::vector<double> b_;
};

double f_eval(const BranchingLaw& law, double u);
double f_derivative(const BranchingLaw& law, int order, double u);
/// beta = f'(1) = sum n b_n.
double beta(const BranchingLaw& law);

enum class Criticality { subcritical, critical, supercritical };
std::string to_string(Criticality c);

/// Three-way comparison of beta with beta_c, equality within 1e-12 relative.
Criticality classify_criticality(const BranchingLaw& law, double beta_c);

struct SignReport {
  double beta = 0.0;
  std::optional<double> u_star;  // only for beta > 0
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks the sign pattern of f and its derivatives on a dense u grid.
SignReport check_f_sign_structure(const BranchingLaw& law, int grid_points = 2001);

/// Least root of f in [0, 1) for beta > 0.
double root_u_star(const BranchingLaw& law);

/// Laplace parameter z >= 0 or the infinity marker.
struct LaplaceParameter {
  static LaplaceParameter infinity() { return LaplaceParameter{0.0, true}; }
  static LaplaceParameter finite(double z);
  double value = 0.0;
  bool is_infinite = false;
  /// e^{-z}, exactly 0 for the marker.
  double exp_minus() const;
};

struct ExtinctionRoot {
  LaplaceParameter z;
  LatticePoint x;
  double c = 0.0;       // c(z, x)
  double c0 = 0.0;      // c(z, 0)
  double residual = 0.0;
};

/// Least non-negative root c(z,0) of 1 - c - e^{-z} = G0_00 f(1 - c), then
/// c(z,x) = 1 - e^{-z} - G0_x0 f(1 - c(z,0)).
ExtinctionRoot extinction_root(const BranchingLaw& law, double G0_00, double G0_x0,
                               LaplaceParameter z, LatticePoint x = {});

}  // namespace brw
