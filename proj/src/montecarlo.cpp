#include "brw/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "brw/error.hpp"
#include "brw/parallel.hpp"

namespace brw {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

// Tail jumps longer than this are redrawn; keeps positions far from int64
// overflow. The discarded mass is below 1e-7 even for alpha = 0.5.
constexpr double kMaxTailJump = 9.0e15;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::int64_t saturating_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) {
    return b > 0 ? std::numeric_limits<std::int64_t>::max() : std::numeric_limits<std::int64_t>::min();
  }
  return r;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

PhiloxStream::PhiloxStream(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream) {}

std::uint64_t PhiloxStream::next_u64() {
  if (used_ >= 4) {
    buffer_ = philox4x32({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                          static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                         key_);
    ++block_;
    used_ = 0;
  }
  const std::uint64_t v = (static_cast<std::uint64_t>(buffer_[used_]) << 32) | buffer_[used_ + 1];
  used_ += 2;
  return v;
}

double PhiloxStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double PhiloxStream::exponential(double rate) { return -std::log(uniform()) / rate; }

JumpSampler::JumpSampler(const WalkKernel& k) : dim_(k.dimension()) {
  const double total = k.total_rate();
  if (!(total > 0.0)) throw ValidationError("kernel has no jumps");
  const auto& support = k.support();
  points_.reserve(support.size());
  prob_.reserve(support.size());
  for (const auto& j : support) {
    points_.push_back(j.z);
    prob_.push_back(j.rate / total);
  }
  if (k.tail_mode() == TailMode::exact && k.tail_mass() > 0.0) {
    tail_prob_ = k.tail_mass() / total;
    tail_s_ = 1.0 + *k.tail_alpha();
    radius_ = k.truncation_radius();
  }

  // Vose alias table over the explicit entries plus one slot for the tail.
  const std::size_t n = prob_.size() + (tail_prob_ > 0.0 ? 1 : 0);
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < prob_.size(); ++i) scaled[i] = prob_[i] * static_cast<double>(n);
  if (tail_prob_ > 0.0) scaled.back() = tail_prob_ * static_cast<double>(n);
  alias_prob_.assign(n, 1.0);
  alias_.resize(n);
  std::iota(alias_.begin(), alias_.end(), 0u);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    alias_prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (auto i : small) alias_prob_[i] = 1.0;
  for (auto i : large) alias_prob_[i] = 1.0;
}

std::int64_t JumpSampler::sample_tail(PhiloxStream& rng) const {
  // P(K = k) proportional to k^{-s} for k > R. Proposal: floor of a Pareto
  // variable on [R+1, inf), whose mass on [k, k+1) is at least (k+1)^{-s}, so
  // the acceptance ratio is bounded by (1 + 1/(R+1))^s.
  const double s = tail_s_;
  const double lo = radius_ + 1.0;
  const double bound = std::pow(1.0 + 1.0 / lo, s);
  for (;;) {
    const double y = lo * std::pow(rng.uniform(), -1.0 / (s - 1.0));
    if (!(y < kMaxTailJump)) continue;
    const double kk = std::floor(y);
    // int_k^{k+1} y^{-s} dy, written to avoid cancellation for large k.
    const double cell = -std::pow(kk, 1.0 - s) * std::expm1((1.0 - s) * std::log1p(1.0 / kk)) / (s - 1.0);
    const double accept = std::pow(kk, -s) / (bound * cell);
    if (rng.uniform() <= accept) {
      const auto mag = static_cast<std::int64_t>(kk);
      return rng.uniform() < 0.5 ? -mag : mag;
    }
  }
}

long JumpSampler::sample_index(PhiloxStream& rng, std::int64_t* tail_jump) const {
  const double u = rng.uniform() * static_cast<double>(alias_.size());
  auto i = static_cast<std::size_t>(u);
  if (i >= alias_.size()) i = alias_.size() - 1;
  const double frac = u - static_cast<double>(i);
  const std::size_t pick = frac < alias_prob_[i] ? i : alias_[i];
  if (pick < points_.size()) return static_cast<long>(pick);
  *tail_jump = sample_tail(rng);
  return -1;
}

void JumpSampler::sample(PhiloxStream& rng, std::int64_t* z) const {
  std::int64_t tail = 0;
  const long idx = sample_index(rng, &tail);
  if (idx >= 0) {
    std::copy(points_[idx].begin(), points_[idx].end(), z);
  } else {
    z[0] = tail;
  }
}

namespace {

void validate(const SimConfig& cfg) {
  if (!cfg.kernel) throw ValidationError("simulation needs a kernel");
  const auto d = static_cast<std::size_t>(cfg.kernel->dimension());
  if (!cfg.x0.empty() && cfg.x0.size() != d) throw ValidationError("x0 has the wrong dimension");
  if (cfg.checkpoints.empty()) throw ValidationError("simulation needs at least one checkpoint");
  for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
    if (!(cfg.checkpoints[i] >= 0.0) || !std::isfinite(cfg.checkpoints[i])) {
      throw ValidationError("checkpoints must be finite and >= 0");
    }
    if (i > 0 && !(cfg.checkpoints[i] > cfg.checkpoints[i - 1])) {
      throw ValidationError("checkpoints must increase strictly");
    }
  }
  if (cfg.horizon != 0.0 && cfg.horizon < cfg.checkpoints.back()) {
    throw ValidationError("horizon is before the last checkpoint");
  }
  if (cfg.population_cap == 0) throw ValidationError("population cap must be positive");
}

struct Particle {
  double t;
  std::size_t next_checkpoint;
};

}  // namespace

ReplicaRecord run_replica(const SimConfig& cfg, const JumpSampler& sampler, std::uint64_t replica) {
  validate(cfg);
  const auto& k = *cfg.kernel;
  const std::size_t d = static_cast<std::size_t>(k.dimension());
  const auto& cps = cfg.checkpoints;
  const std::size_t m = cps.size();
  const double horizon = cfg.horizon > 0.0 ? cfg.horizon : cps.back();
  const double jump_rate = k.total_rate();
  const double branch_rate = cfg.law.rate();

  // Offspring numbers n != 1 and their cumulative probabilities b_n / (-b_1).
  std::vector<int> offspring;
  std::vector<double> cumulative;
  double acc = 0.0;
  for (int n = 0; n <= cfg.law.max_offspring(); ++n) {
    if (n == 1 || cfg.law.b(n) <= 0.0) continue;
    acc += cfg.law.b(n) / branch_rate;
    offspring.push_back(n);
    cumulative.push_back(acc);
  }

  ReplicaRecord rec;
  rec.population.assign(m, 0);
  rec.at_origin.assign(m, 0);

  PhiloxStream rng(cfg.seed, replica);
  std::vector<Particle> stack;
  std::vector<std::int64_t> stack_pos;
  std::vector<std::int64_t> pos(d, 0);
  if (!cfg.x0.empty()) std::copy(cfg.x0.begin(), cfg.x0.end(), pos.begin());
  std::vector<std::int64_t> jump(d, 0);

  stack.push_back({0.0, 0});
  stack_pos.insert(stack_pos.end(), pos.begin(), pos.end());

  while (!stack.empty()) {
    Particle p = stack.back();
    stack.pop_back();
    std::copy(stack_pos.end() - static_cast<std::ptrdiff_t>(d), stack_pos.end(), pos.begin());
    stack_pos.resize(stack_pos.size() - d);

    for (;;) {
      const bool at_origin = std::all_of(pos.begin(), pos.end(), [](std::int64_t v) { return v == 0; });
      const double rate = jump_rate + (at_origin ? branch_rate : 0.0);
      const double t_next = p.t + rng.exponential(rate);
      while (p.next_checkpoint < m && cps[p.next_checkpoint] < t_next) {
        const std::size_t c = p.next_checkpoint++;
        if (++rec.population[c] > cfg.population_cap) {
          rec.cap_hit = true;
          return rec;
        }
        if (at_origin) ++rec.at_origin[c];
      }
      if (t_next > horizon) break;
      p.t = t_next;

      if (at_origin && rng.uniform() * rate < branch_rate) {
        const double u = rng.uniform();
        std::size_t j = 0;
        while (j + 1 < cumulative.size() && u > cumulative[j]) ++j;
        const int n = offspring[j];
        if (n == 0) break;
        for (int c = 1; c < n; ++c) {
          stack.push_back(p);
          stack_pos.insert(stack_pos.end(), pos.begin(), pos.end());
        }
        if (stack.size() > cfg.population_cap) {
          rec.cap_hit = true;
          return rec;
        }
        continue;
      }

      std::fill(jump.begin(), jump.end(), 0);
      sampler.sample(rng, jump.data());
      for (std::size_t i = 0; i < d; ++i) pos[i] = saturating_add(pos[i], jump[i]);
    }
  }
  return rec;
}

ReplicaRecord run_replica(const SimConfig& cfg, std::uint64_t replica) {
  validate(cfg);
  const JumpSampler sampler(*cfg.kernel);
  return run_replica(cfg, sampler, replica);
}

McEstimate estimate_survival(const SimConfig& cfg, std::uint64_t n_replicas) {
  validate(cfg);
  if (n_replicas < 100) throw ValidationError("Monte Carlo needs at least 100 replicas");
  const JumpSampler sampler(*cfg.kernel);
  const std::size_t m = cfg.checkpoints.size();

  struct Sums {
    std::vector<std::uint64_t> alive, present, pop;
    std::vector<unsigned __int128> pop2;
    std::uint64_t caps = 0;
  };
  constexpr std::size_t kBlock = 64;
  const std::size_t blocks = (n_replicas + kBlock - 1) / kBlock;
  std::vector<Sums> partial(blocks);
  parallel_blocks(n_replicas, kBlock, cfg.threads, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    Sums s;
    s.alive.assign(m, 0);
    s.present.assign(m, 0);
    s.pop.assign(m, 0);
    s.pop2.assign(m, 0);
    for (std::size_t r = lo; r < hi; ++r) {
      const auto rec = run_replica(cfg, sampler, r);
      if (rec.cap_hit) ++s.caps;
      for (std::size_t c = 0; c < m; ++c) {
        // A replica that outgrew the cap is counted as surviving everywhere.
        const std::uint64_t n = rec.population[c];
        if (n > 0 || rec.cap_hit) ++s.alive[c];
        if (rec.at_origin[c] > 0) ++s.present[c];
        s.pop[c] += n;
        s.pop2[c] += static_cast<unsigned __int128>(n) * n;
      }
    }
    partial[b] = std::move(s);
  });

  Sums total;
  total.alive.assign(m, 0);
  total.present.assign(m, 0);
  total.pop.assign(m, 0);
  total.pop2.assign(m, 0);
  for (const auto& s : partial) {
    total.caps += s.caps;
    for (std::size_t c = 0; c < m; ++c) {
      total.alive[c] += s.alive[c];
      total.present[c] += s.present[c];
      total.pop[c] += s.pop[c];
      total.pop2[c] += s.pop2[c];
    }
  }

  McEstimate est;
  est.t = cfg.checkpoints;
  est.replicas = n_replicas;
  est.cap_hits = total.caps;
  const double n = static_cast<double>(n_replicas);
  for (std::size_t c = 0; c < m; ++c) {
    const double q = static_cast<double>(total.alive[c]) / n;
    const double pr = static_cast<double>(total.present[c]) / n;
    const double mean = static_cast<double>(total.pop[c]) / n;
    const double second = static_cast<double>(total.pop2[c]) / n;
    est.survival.push_back(q);
    est.survival_se.push_back(std::sqrt(q * (1.0 - q) / n));
    est.presence.push_back(pr);
    est.presence_se.push_back(std::sqrt(pr * (1.0 - pr) / n));
    est.mean_population.push_back(mean);
    est.mean_population_se.push_back(std::sqrt(std::max(0.0, second - mean * mean) / n));
  }
  if (static_cast<double>(total.caps) > 0.01 * n) {
    std::ostringstream os;
    os << total.caps << " of " << n_replicas
       << " replicas hit the population cap; mean population is biased low";
    est.warnings.push_back(os.str());
  }
  return est;
}

McEstimate estimate_mean_population(const SimConfig& cfg, std::uint64_t n_replicas) {
  return estimate_survival(cfg, n_replicas);
}

}  // namespace brw
