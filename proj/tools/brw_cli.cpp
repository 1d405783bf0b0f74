#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "brw/branching.hpp"
#include "brw/config.hpp"
#include "brw/error.hpp"
#include "brw/kernel.hpp"
#include "brw/montecarlo.hpp"
#include "brw/scenarios.hpp"
#include "brw/transition.hpp"
#include "brw/volterra.hpp"

namespace {

using namespace brw;

constexpr int kExitValidation = 1;
constexpr int kExitConvergence = 2;
constexpr int kExitScenario = 3;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  unsigned threads = 0;
  bool threads_given = false;
};

Config load(const Common& c) {
  Config cfg = c.config_path.empty() ? Config{} : Config::from_file(c.config_path);
  for (const auto& o : c.overrides) cfg.apply_override(o);
  if (c.threads_given) cfg.set("threads", std::to_string(c.threads));
  cfg.check_known_keys();
  return cfg;
}

// CSV goes to --out when given, otherwise to stdout.
class CsvSink {
 public:
  explicit CsvSink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ValidationError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(15) << v;
  return os.str();
}

int cmd_kernel_validate(const Common& c) {
  const auto cfg = load(c);
  const auto k = make_kernel(cfg);
  bool ok = true;
  for (const auto& check : check_kernel(k)) {
    std::cout << (check.passed ? "PASS " : "FAIL ") << check.name;
    if (!check.detail.empty()) std::cout << "  " << check.detail;
    std::cout << '\n';
    ok = ok && check.passed;
  }
  return ok ? 0 : kExitValidation;
}

int cmd_kernel_dump(const Common& c) {
  const auto cfg = load(c);
  const auto k = make_kernel(cfg);
  CsvSink sink(c.out);
  auto& out = sink.stream();
  write_csv_preamble(out, cfg, {"z", "rate"});
  out << format_point(LatticePoint(k.dimension(), 0)) << ',' << num(k.diagonal()) << '\n';
  for (const auto& j : k.support()) out << format_point(j.z) << ',' << num(j.rate) << '\n';
  if (k.tail_mass() > 0.0) out << "tail>" << k.truncation_radius() << ',' << num(k.tail_mass()) << '\n';
  return 0;
}

int cmd_green(const Common& c) {
  const auto cfg = load(c);
  const auto k = make_kernel(cfg);
  const int d = k.dimension();
  const SpectralIntegrator quad(k, make_quadrature_options(cfg));
  const auto lambdas = cfg.numbers("lambda", {0.0});
  const auto xs = cfg.points("x", d, {LatticePoint(d, 0)});
  const auto y = cfg.points("y", d, {LatticePoint(d, 0)}).front();
  CsvSink sink(c.out);
  auto& out = sink.stream();
  write_csv_preamble(out, cfg, {"lambda", "x", "y", "value", "quad_error", "divergent", "classification", "note"});
  for (double lambda : lambdas) {
    for (const auto& x : xs) {
      const auto g = green_function(quad, lambda, x, y);
      out << num(lambda) << ',' << format_point(x) << ',' << format_point(y) << ',' << num(g.value) << ','
          << num(g.quad_error) << ',' << (g.divergent ? 1 : 0) << ',' << to_string(g.classification) << ','
          << g.note << '\n';
    }
  }
  return 0;
}

int cmd_criticality(const Common& c) {
  const auto cfg = load(c);
  const auto k = make_kernel(cfg);
  const auto law = make_law(cfg);
  const SpectralIntegrator quad(k, make_quadrature_options(cfg));
  const auto rec = classify_recurrence(quad);
  const double bc = critical_intensity(quad);
  const double b = beta(law);
  const auto regime = classify_criticality(law, bc);
  std::cout << "classification " << to_string(rec.rule) << '\n'
            << "numeric_check " << (rec.consistent ? "consistent" : "inconsistent") << "  " << rec.detail << '\n'
            << "beta_c " << num(bc) << '\n'
            << "beta " << num(b) << '\n'
            << "regime " << to_string(regime) << '\n';
  if (regime == Criticality::supercritical) {
    const auto l0 = solve_lambda0(quad, b);
    std::cout << "lambda0 " << num(l0.lambda0) << "  residual " << num(l0.residual) << '\n';
  }
  return 0;
}

int cmd_survive(const Common& c) {
  const auto cfg = load(c);
  const auto k = make_kernel(cfg);
  const int d = k.dimension();
  const auto law = make_law(cfg);
  const auto quad = std::make_shared<const SpectralIntegrator>(k, make_quadrature_options(cfg));
  VolterraSolver solver(quad, make_grid(cfg), make_volterra_options(cfg));
  const std::string kind = cfg.text("curve", "Q");
  const auto xs = cfg.points("x", d, {LatticePoint(d, 0)});

  std::vector<SurvivalCurve> curves;
  if (kind == "q") {
    curves.push_back(solver.solve_q_local(law));
  } else if (kind == "Q" || kind == "F") {
    for (const auto& x : xs) {
      curves.push_back(kind == "Q" ? solver.solve_Q_total(law, x) : solver.solve_F(law, cfg.number("z", 1.0), x));
    }
  } else {
    throw ValidationError("curve must be Q, q or F");
  }

  CsvSink sink(c.out);
  auto& out = sink.stream();
  // Residual and iterations belong to the x = 0 solve that every curve reuses.
  write_csv_preamble(out, cfg, {"kind", "x", "t", "value", "residual", "iterations"});
  const auto& grid = solver.grid();
  for (const auto& cv : curves) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out << to_string(cv.kind) << ',' << format_point(cv.x) << ',' << num(grid[i]) << ',' << num(cv.values[i]) << ','
          << num(i < cv.residuals.size() ? cv.residuals[i] : 0.0) << ','
          << (i < cv.iterations.size() ? cv.iterations[i] : 0) << '\n';
    }
  }

  const std::string fit = cfg.text("fit", "none");
  if (fit != "none") {
    AsymptoteModel model;
    if (fit == "power") {
      model = AsymptoteModel::power;
    } else if (fit == "logpower") {
      model = AsymptoteModel::logpower;
    } else if (fit == "constant") {
      model = AsymptoteModel::constant;
    } else {
      throw ValidationError("fit must be none, power, logpower or constant");
    }
    const auto w = cfg.numbers("fit.window", {grid.horizon() / 10.0, grid.horizon()});
    if (w.size() != 2) throw ValidationError("fit.window needs two numbers");
    for (const auto& cv : curves) {
      const auto f = fit_asymptote(cv, model, {w[0], w[1]});
      std::cerr << "fit x=" << format_point(cv.x) << ' ' << to_string(model) << " exponent " << num(f.exponent)
                << " amplitude " << num(f.amplitude) << " residual " << num(f.residual) << " nodes " << f.nodes
                << '\n';
    }
  }
  return 0;
}

int cmd_simulate(const Common& c) {
  const auto cfg = load(c);
  auto k = std::make_shared<const WalkKernel>(make_kernel(cfg));
  const auto sim = make_sim_config(cfg, k);
  const long n = cfg.integer("n_replicas", 10000);
  if (n < 0) throw ValidationError("n_replicas must be >= 0");
  const auto est = estimate_survival(sim, static_cast<std::uint64_t>(n));
  CsvSink sink(c.out);
  auto& out = sink.stream();
  write_csv_preamble(out, cfg,
                     {"t", "Q_hat", "Q_se", "presence_hat", "presence_se", "mean_pop", "mean_pop_se", "n", "cap_hits"});
  for (std::size_t i = 0; i < est.t.size(); ++i) {
    out << num(est.t[i]) << ',' << num(est.survival[i]) << ',' << num(est.survival_se[i]) << ','
        << num(est.presence[i]) << ',' << num(est.presence_se[i]) << ',' << num(est.mean_population[i]) << ','
        << num(est.mean_population_se[i]) << ',' << est.replicas << ',' << est.cap_hits << '\n';
  }
  for (const auto& w : est.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int print_report(const ScenarioReport& r) {
  std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  (" << std::fixed << std::setprecision(2) << r.seconds
            << " s)\n"
            << std::defaultfloat;
  for (const auto& ch : r.checks) {
    std::cout << "  " << (ch.passed ? "ok   " : "FAIL ") << ch.label << ": " << std::setprecision(10) << ch.value;
    if (ch.tolerance > 0.0) std::cout << " (ref " << ch.reference << " +- " << std::setprecision(3) << ch.tolerance << ')';
    if (!ch.detail.empty()) std::cout << "  " << ch.detail;
    std::cout << '\n';
  }
  for (const auto& note : r.notes) std::cout << "  note: " << note << '\n';
  return r.passed ? 0 : kExitScenario;
}

int cmd_verify(const Common& c, const std::string& name, bool list) {
  if (list) {
    for (const auto& n : scenario_names()) std::cout << n << '\n';
    return 0;
  }
  const auto cfg = load(c);
  ScenarioOptions opts;
  opts.threads = thread_setting(cfg);
  if (name == "all") {
    int code = 0;
    for (const auto& n : scenario_names()) {
      if (print_report(run_scenario(n, opts)) != 0) code = kExitScenario;
    }
    return code;
  }
  return print_report(run_scenario(name, opts));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branching random walks on Z^d: Green functions, survival curves, simulation"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config,-c", common.config_path, "key = value config file");
    sub->add_option("--set,-s", common.overrides, "override a config key (key=value), repeatable");
    sub->add_option("--out,-o", common.out, "CSV output path (default stdout)");
    sub->add_option_function<unsigned>(
        "--threads", [&](unsigned n) { common.threads = n, common.threads_given = true; },
        "worker threads (0 = BRW_THREADS or hardware)");
  };

  auto* validate = app.add_subcommand("kernel-validate", "check every kernel invariant");
  auto* dump = app.add_subcommand("kernel-dump", "print the jump rates as CSV");
  auto* green = app.add_subcommand("green", "Green function G_lambda(x,y) for the lambda and x lists");
  auto* crit = app.add_subcommand("criticality", "recurrence, beta_c, regime and lambda0");
  auto* survive = app.add_subcommand("survive", "survival curves from the Volterra equations");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of survival and population");
  auto* verify = app.add_subcommand("verify", "run a named acceptance scenario (or 'all')");
  for (auto* s : {validate, dump, green, crit, survive, simulate, verify}) add_common(s);
  std::string scenario;
  bool list = false;
  verify->add_option("scenario", scenario, "scenario name");
  verify->add_flag("--list", list, "list scenario names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*validate) return cmd_kernel_validate(common);
    if (*dump) return cmd_kernel_dump(common);
    if (*green) return cmd_green(common);
    if (*crit) return cmd_criticality(common);
    if (*survive) return cmd_survive(common);
    if (*simulate) return cmd_simulate(common);
    if (*verify) {
      if (scenario.empty() && !list) throw ValidationError("verify needs a scenario name (see --list)");
      return cmd_verify(common, scenario, list);
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << " (best value " << e.partial_value() << ", error "
              << e.error_estimate() << ")\n";
    return kExitConvergence;
  } catch (const InvariantError& e) {
    std::cerr << "numerical invariant violated: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConvergence;
  }
  return 0;
}
