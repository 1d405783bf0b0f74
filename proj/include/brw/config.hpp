#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "brw/branching.hpp"
#include "brw/kernel.hpp"
#include "brw/montecarlo.hpp"
#include "brw/quadrature.hpp"
#include "brw/volterra.hpp"

namespace brw {

/// Flat key-value run configuration.
///
/// File format: one `key = value` per line, `#` starts a comment. Lists use
/// commas (`law = 0.5,-1,0.5`); lattice point lists separate points with
/// semicolons and coordinates with commas (`x = 0;1;0,2` style).
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  /// `key=value`; later values replace earlier ones.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<LatticePoint> points(const std::string& key, int d,
                                   const std::vector<LatticePoint>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  /// FNV-1a over the sorted `key=value` lines.
  std::uint64_t hash() const;
  std::string hash_hex() const;
  /// Resolved entries on one line, `k=v` separated by spaces.
  std::string summary() const;

  /// Throws ValidationError naming the first key not in the known set.
  void check_known_keys() const;

 private:
  std::map<std::string, std::string> entries_;
};

/// Kernel from `kernel` (nearest | weights | heavy, or the aliases
/// finite-variance and heavy-tail), `dimension`, `weights`,
/// `alpha`, `radius`, `scale`, `H`, `H.table`, `tail`.
WalkKernel make_kernel(const Config& cfg);
/// Law from `law`, either b_0,b_1,... or n:b_n pairs separated by
/// semicolons; defaults to pure death 1,-1.
BranchingLaw make_law(const Config& cfg);
/// Grid from `grid` (uniform | geometric), `T`, `h`, `t_warm`, `ratio`.
TimeGrid make_grid(const Config& cfg);
QuadratureOptions make_quadrature_options(const Config& cfg);
VolterraOptions make_volterra_options(const Config& cfg);
/// Simulation setup from `seed`, `cap`, `checkpoints`, `x0`, `horizon`.
SimConfig make_sim_config(const Config& cfg, std::shared_ptr<const WalkKernel> kernel);
unsigned thread_setting(const Config& cfg);

/// Comment line with the config hash and resolved entries, then the header.
void write_csv_preamble(std::ostream& out, const Config& cfg, const std::vector<std::string>& header);

std::string format_point(const LatticePoint& x);

}  // namespace brw
