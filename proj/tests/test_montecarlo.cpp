#include <doctest.h>

#include <cmath>
#include <map>
#include <memory>

#include <boost/math/distributions/chi_squared.hpp>

#include "brw/error.hpp"
#include "brw/montecarlo.hpp"
#include "brw/tail_symbol.hpp"
#include "brw/transition.hpp"
#include "brw/volterra.hpp"
#include "oracles.hpp"

using namespace brw;

namespace {

double chi_square_critical(int dof, double alpha) {
  const boost::math::chi_squared dist(dof);
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

SimConfig config(WalkKernel k, BranchingLaw law, std::vector<double> checkpoints, std::uint64_t seed = 1) {
  SimConfig c;
  c.x0 = LatticePoint(k.dimension(), 0);
  c.kernel = std::make_shared<const WalkKernel>(std::move(k));
  c.law = std::move(law);
  c.checkpoints = std::move(checkpoints);
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("Philox4x32-10 known answers") {
  using A = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  PhiloxStream a(5, 0), b(5, 0), c(5, 1), d(6, 0);
  for (int i = 0; i < 10; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
    CHECK(va != d.next_u64());
  }
  PhiloxStream u(1, 2);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
    mean += x;
  }
  CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("jump sampler probabilities") {
  const JumpSampler sw(build_nearest_neighbor_kernel(1));
  REQUIRE(sw.probabilities().size() == 2);
  CHECK(sw.probabilities()[0] == 0.5);
  CHECK(sw.tail_probability() == 0.0);

  const auto k = build_heavy_tail_kernel(1, 1.5, DirectionFunction::constant(1.0), 2, 1.0);
  const JumpSampler hs(k);
  std::map<std::int64_t, double> p;
  for (std::size_t i = 0; i < k.support().size(); ++i) p[k.support()[i].z[0]] = hs.probabilities()[i];
  CHECK(p[1] == doctest::Approx(0.424885).epsilon(1e-5));
  CHECK(p[-1] == doctest::Approx(0.424885).epsilon(1e-5));
  CHECK(p[2] == doctest::Approx(0.075115).epsilon(1e-4));
}

TEST_CASE("jump sampler goodness of fit") {
  const auto k = build_heavy_tail_kernel(2, 1.0, DirectionFunction::constant(1.0), 3, 1.0);
  const JumpSampler s(k);
  std::map<LatticePoint, int> counts;
  PhiloxStream rng(42, 0);
  const int n = 1'000'000;
  std::int64_t z[2];
  for (int i = 0; i < n; ++i) {
    s.sample(rng, z);
    ++counts[{z[0], z[1]}];
  }
  double chi2 = 0.0;
  for (const auto& j : k.support()) {
    const double expected = n * j.rate / k.total_rate();
    const double diff = counts[j.z] - expected;
    chi2 += diff * diff / expected;
  }
  CHECK(counts.size() == k.support().size());
  CHECK(chi2 < chi_square_critical(static_cast<int>(k.support().size()) - 1, 1e-3));
}

TEST_CASE("exact-tail sampler follows the power law beyond R") {
  const int R = 4;
  const double s = 2.5;
  const auto k = build_heavy_tail_kernel(1, 1.5, DirectionFunction::constant(1.0), R, 1.0, TailMode::exact);
  const JumpSampler js(k);
  CHECK(js.tail_probability() == doctest::Approx(k.tail_mass() / k.total_rate()));
  PhiloxStream rng(3, 0);
  const int n = 1'000'000;
  const int bins = 30;  // |z| = 1..bins-1, last bin collects the rest
  std::vector<double> counts(bins, 0.0);
  std::int64_t pos = 0, neg = 0;
  for (int i = 0; i < n; ++i) {
    std::int64_t z;
    js.sample(rng, &z);
    (z > 0 ? pos : neg)++;
    const auto a = std::abs(z);
    counts[std::min<std::int64_t>(a, bins) - 1] += 1.0;
  }
  std::vector<double> prob(bins, 0.0);
  const double total = k.total_rate();
  for (int m = 1; m < bins; ++m) prob[m - 1] = 2.0 * std::pow(m, -s) / total;
  prob[bins - 1] = 2.0 * power_law_tail_sum(s, bins - 1) / total;
  double chi2 = 0.0, psum = 0.0;
  for (int b = 0; b < bins; ++b) {
    psum += prob[b];
    const double e = n * prob[b];
    chi2 += (counts[b] - e) * (counts[b] - e) / e;
  }
  CHECK(psum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chi2 < chi_square_critical(bins - 1, 1e-3));
  CHECK(std::abs(static_cast<double>(pos - neg)) < 4.0 * std::sqrt(static_cast<double>(n)));
}

TEST_CASE("replica records") {
  auto cfg = config(build_nearest_neighbor_kernel(1), BranchingLaw({0.5, -1.0, 0.5}), {0.0, 1.0, 5.0});
  const auto r = run_replica(cfg, 17);
  CHECK(r.population[0] == 1);
  CHECK(r.at_origin[0] == 1);
  CHECK(run_replica(cfg, 17) == r);
  for (std::uint64_t id = 0; id < 200; ++id) {
    const auto rec = run_replica(cfg, id);
    for (std::size_t c = 1; c < rec.population.size(); ++c) {
      REQUIRE(rec.at_origin[c] <= rec.population[c]);
      if (rec.population[c] > 0) REQUIRE(rec.population[c - 1] > 0);
    }
  }

  // Starting far from the source, pure death cannot happen before the walk arrives.
  auto far = config(build_nearest_neighbor_kernel(3), BranchingLaw({1.0, -1.0}), {0.0, 2.0});
  far.x0 = {40, 0, 0};
  const auto est = estimate_survival(far, 200);
  CHECK(est.survival[1] == 1.0);
  CHECK(est.presence[1] == 0.0);
}

TEST_CASE("configuration validation") {
  auto cfg = config(build_nearest_neighbor_kernel(1), BranchingLaw({1.0, -1.0}), {1.0});
  CHECK_THROWS_AS(estimate_survival(cfg, 0), ValidationError);
  CHECK_THROWS_AS(estimate_survival(cfg, 99), ValidationError);
  cfg.checkpoints = {2.0, 1.0};
  CHECK_THROWS_AS(estimate_survival(cfg, 100), ValidationError);
  cfg.checkpoints = {1.0};
  cfg.population_cap = 0;
  CHECK_THROWS_AS(estimate_survival(cfg, 100), ValidationError);
}

TEST_CASE("determinism across thread counts") {
  auto cfg = config(build_heavy_tail_kernel(1, 1.5, DirectionFunction::constant(1.0), 64, 1.0, TailMode::exact),
                    BranchingLaw({0.5, -1.0, 0.5}), {1.0, 5.0, 10.0}, 11);
  cfg.threads = 1;
  const auto a = estimate_survival(cfg, 500);
  cfg.threads = 4;
  const auto b = estimate_survival(cfg, 500);
  CHECK(a == b);
  cfg.seed = 12;
  CHECK_FALSE(estimate_survival(cfg, 500) == a);
}

TEST_CASE("critical walk: survival matches Volterra, mean is conserved") {
  auto cfg = config(build_nearest_neighbor_kernel(1), BranchingLaw({0.5, -1.0, 0.5}), {10.0, 100.0}, 2024);
  const auto mc = estimate_survival(cfg, 10000);
  VolterraSolver s(std::make_shared<const SpectralIntegrator>(build_nearest_neighbor_kernel(1)),
                   TimeGrid::geometric_after_warmup(100.0));
  const auto q = s.solve_Q_total(BranchingLaw({0.5, -1.0, 0.5}), {0});
  CHECK(std::abs(mc.survival[1] - q.values.back()) <= 3.0 * mc.survival_se[1]);
  CHECK(std::abs(mc.mean_population[0] - 1.0) <= 3.0 * mc.mean_population_se[0]);
  for (std::size_t i = 0; i < mc.t.size(); ++i) {
    CHECK(mc.survival_se[i] == doctest::Approx(std::sqrt(mc.survival[i] * (1 - mc.survival[i]) / 10000)));
    CHECK(mc.presence[i] <= mc.survival[i]);
    CHECK(mc.mean_population[i] >= mc.survival[i]);
  }
  CHECK(mc.warnings.empty());
}

TEST_CASE("transient pure death: MC against Volterra at t = 50") {
  const auto k = build_nearest_neighbor_kernel(3);
  auto cfg = config(k, BranchingLaw({1.0, -1.0}), {50.0}, 77);
  const auto mc = estimate_survival(cfg, 10000);
  VolterraSolver s(std::make_shared<const SpectralIntegrator>(k), TimeGrid::geometric_after_warmup(50.0, 0.1, 10.0, 1.15));
  const double q50 = s.solve_Q_total(BranchingLaw({1.0, -1.0}), {0, 0, 0}).values.back();
  CHECK(std::abs(mc.survival[0] - q50) <= 3.0 * mc.survival_se[0]);
  // above the t -> infinity root 1/(1 + G_0)
  CHECK(q50 > 1.0 / (1.0 + oracle::watson_g0()));
  CHECK(mc.mean_population[0] >= mc.survival[0]);
}

TEST_CASE("supercritical growth rate") {
  auto cfg = config(build_nearest_neighbor_kernel(1), BranchingLaw({0.0, -1.0, 1.0}), {20.0}, 5);
  const auto mc = estimate_mean_population(cfg, 1000);
  const double rate = std::log(mc.mean_population[0]) / 20.0;
  CHECK(std::abs(rate - oracle::simple_walk_lambda0(1.0)) < 0.15 * oracle::simple_walk_lambda0(1.0));
  CHECK(mc.cap_hits == 0);

  cfg.population_cap = 50;
  const auto capped = estimate_mean_population(cfg, 200);
  CHECK(capped.cap_hits > 2);
  CHECK_FALSE(capped.warnings.empty());
}
