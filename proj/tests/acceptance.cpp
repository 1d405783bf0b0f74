// Acceptance gate: one PASS/FAIL line per criterion, details indented below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "brw/scenarios.hpp"
#include "brw/transition.hpp"
#include "oracles.hpp"

namespace {

using namespace brw;

struct Outcome {
  bool passed = true;
  std::vector<std::string> lines;
};

void absorb(Outcome& out, const ScenarioReport& r) {
  out.passed = out.passed && r.passed;
  char head[256];
  std::snprintf(head, sizeof head, "scenario %s: %s (%.1f s)", r.name.c_str(), r.passed ? "pass" : "FAIL", r.seconds);
  out.lines.emplace_back(head);
  for (const auto& c : r.checks) {
    char buf[512];
    if (c.tolerance > 0.0) {
      std::snprintf(buf, sizeof buf, "  %s %s: %.10g (ref %.10g, tol %.3g) %s", c.passed ? "ok  " : "FAIL",
                    c.label.c_str(), c.value, c.reference, c.tolerance, c.detail.c_str());
    } else {
      std::snprintf(buf, sizeof buf, "  %s %s %s", c.passed ? "ok  " : "FAIL", c.label.c_str(), c.detail.c_str());
    }
    out.lines.emplace_back(buf);
  }
  for (const auto& n : r.notes) out.lines.push_back("  note: " + n);
}

void oracle_check(Outcome& out, const std::string& label, double value, double ref, double tol) {
  const bool ok = std::abs(value - ref) <= tol;
  out.passed = out.passed && ok;
  char buf[512];
  std::snprintf(buf, sizeof buf, "  %s independent oracle, %s: %.12g vs %.12g (tol %.3g)", ok ? "ok  " : "FAIL",
                label.c_str(), value, ref, tol);
  out.lines.emplace_back(buf);
}

Outcome scenarios(std::initializer_list<const char*> names) {
  Outcome out;
  for (const char* n : names) absorb(out, run_scenario(n));
  return out;
}

Outcome criterion1() {
  auto out = scenarios({"green-watson"});
  const double g = green_function(build_nearest_neighbor_kernel(3), 0.0, {0, 0, 0}, {0, 0, 0}).value;
  oracle_check(out, "Watson closed form", g, oracle::watson_g0(), 1e-3);
  return out;
}

Outcome criterion2() {
  auto out = scenarios({"transition-bessel"});
  const SpectralIntegrator quad(build_nearest_neighbor_kernel(1), {.rel_tol = 1e-10});
  for (double t : {0.5, 1.0, 5.0}) {
    oracle_check(out, "p(" + std::to_string(t) + ",0,0) vs Bessel series", transition_probability(quad, t, {0}, {0}).value,
                 oracle::scaled_bessel(0, t), 1e-6);
  }
  oracle_check(out, "delta(1,1) vs Bessel series", transition_delta(quad, 1.0, {1}).value,
               oracle::scaled_bessel(0, 1.0) - oracle::scaled_bessel(1, 1.0), 1e-6);
  return out;
}

Outcome criterion3() {
  auto out = scenarios({"lambda0-closed-form"});
  const SpectralIntegrator quad(build_nearest_neighbor_kernel(1), {.rel_tol = 1e-12});
  oracle_check(out, "lambda0(beta=1)", solve_lambda0(quad, 1.0).lambda0, oracle::simple_walk_lambda0(1.0), 1e-8);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "Green's function accuracy, d=3 G0(0,0) = 1.516386 +- 1e-3, under 1 minute", criterion1},
      {2, "Transition probabilities vs Bessel oracle to 1e-6", criterion2},
      {3, "lambda0 closed form, d=1, beta=1 -> sqrt(2)-1 within 1e-8", criterion3},
      {4, "Volterra vs Monte Carlo within 3 SE at t = 1, 5, 10, 25 (10^4 replicas)",
       [] { return scenarios({"volterra-mc-agreement"}); }},
      {5, "d=1 finite-variance slopes over [100,1000]: critical -0.25 +- 0.05, subcritical -0.5 +- 0.05",
       [] { return scenarios({"d1-critical-exponent", "d1-subcritical-exponent"}); }},
      {6, "d=1 heavy tail alpha=1.5 slopes: critical -1/6, subcritical -1/3 (+- 0.07 or trend fallback)",
       [] { return scenarios({"heavy-tail-critical-exponent", "heavy-tail-subcritical-exponent"}); }},
      {7, "d=3 transient plateau, Volterra and MC within 1e-2 of 1/(1+G0)",
       [] { return scenarios({"transient-plateau"}); }},
      {8, "Heavy-tail delta ratio at t=1e4 within 10% of 1", [] { return scenarios({"theorem1-ratio"}); }},
      {9, "Property suites", [] { return scenarios({"property-suite"}); }},
  };

  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.passed = false;
      out.lines.push_back(std::string("  exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s (%.1f s)\n", out.passed ? "PASS" : "FAIL", c.id, c.title, secs);
    for (const auto& l : out.lines) std::printf("    %s\n", l.c_str());
    if (!out.passed) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
