#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "brw/branching.hpp"
#include "brw/kernel.hpp"

namespace brw {

/// Philox4x32-10 counter-based generator.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Independent stream for (seed, stream id); draws walk the counter.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double exponential(double rate);

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

/// Draws jumps z with probability a(z)/(-a(0)): Walker/Vose alias table over
/// the explicit support plus, for exact tails, a rejection sampler beyond R.
class JumpSampler {
 public:
  explicit JumpSampler(const WalkKernel& k);

  int dimension() const { return dim_; }
  /// Probability of each explicit support entry, in kernel support order.
  const std::vector<double>& probabilities() const { return prob_; }
  double tail_probability() const { return tail_prob_; }

  /// Writes the jump into z (size d).
  void sample(PhiloxStream& rng, std::int64_t* z) const;
  /// Index into the support, or -1 for a tail jump (then |z| is in *tail).
  long sample_index(PhiloxStream& rng, std::int64_t* tail_jump) const;

 private:
  std::int64_t sample_tail(PhiloxStream& rng) const;

  int dim_ = 1;
  std::vector<LatticePoint> points_;
  std::vector<double> prob_;
  std::vector<double> alias_prob_;
  std::vector<std::uint32_t> alias_;
  double tail_prob_ = 0.0;
  double tail_s_ = 0.0;  // exponent of k^{-s}
  int radius_ = 0;
};

struct SimConfig {
  std::shared_ptr<const WalkKernel> kernel;
  BranchingLaw law{{1.0, -1.0}};
  LatticePoint x0;
  std::vector<double> checkpoints;  // sorted, within [0, horizon]
  double horizon = 0.0;             // 0 means the last checkpoint
  std::uint64_t population_cap = 1'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct ReplicaRecord {
  std::vector<std::uint64_t> population;  // per checkpoint
  std::vector<std::uint64_t> at_origin;   // particles at the source
  bool cap_hit = false;

  bool operator==(const ReplicaRecord&) const = default;
};

ReplicaRecord run_replica(const SimConfig& cfg, const JumpSampler& sampler, std::uint64_t replica);
ReplicaRecord run_replica(const SimConfig& cfg, std::uint64_t replica);

struct McEstimate {
  std::vector<double> t;
  std::vector<double> survival;
  std::vector<double> survival_se;
  std::vector<double> presence;
  std::vector<double> presence_se;
  std::vector<double> mean_population;
  std::vector<double> mean_population_se;
  std::uint64_t replicas = 0;
  std::uint64_t cap_hits = 0;
  std::vector<std::string> warnings;

  bool operator==(const McEstimate&) const = default;
};

/// Runs replicas 0..n-1 and aggregates with integer sums, so the result does
/// not depend on the thread count. Needs n >= 100.
McEstimate estimate_survival(const SimConfig& cfg, std::uint64_t n_replicas);
/// Same estimator; named separately for the mean-population use case.
McEstimate estimate_mean_population(const SimConfig& cfg, std::uint64_t n_replicas);

}  // namespace brw
