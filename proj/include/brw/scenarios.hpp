#pragma once

#include <string>
#include <vector>

namespace brw {

struct ScenarioCheck {
  std::string label;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct ScenarioReport {
  std::string name;
  bool passed = false;
  std::vector<ScenarioCheck> checks;
  std::vector<std::string> notes;
  double seconds = 0.0;
};

struct ScenarioOptions {
  unsigned threads = 0;
};

/// Names accepted by run_scenario, in acceptance order.
std::vector<std::string> scenario_names();

/// Throws ValidationError listing the available names for an unknown one.
ScenarioReport run_scenario(const std::string& name, const ScenarioOptions& options = {});

/// G_0(0,0) of the d = 3 nearest-neighbour walk from the time-domain
/// representation 3 int_0^inf (e^{-u} I_0(u))^3 du. `points` selects the
/// Gauss-Kronrod order (15, 31 or 61); comparing two orders gives the
/// double-resolution check.
double watson_time_domain(int points);

/// e^{-u} I_0(u), stable for large u.
double scaled_bessel_i0(double u);
double scaled_bessel_i1(double u);

}  // namespace brw
