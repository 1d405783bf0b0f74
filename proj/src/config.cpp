#include "brw/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "brw/error.hpp"

namespace brw {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': not a number: '" + s + "'");
  }
}

long parse_long(const std::string& key, const std::string& s) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("config key '" + key + "': not an integer: '" + s + "'");
  }
  return v;
}

LatticePoint parse_point(const std::string& key, const std::string& s, int d) {
  LatticePoint p;
  for (const auto& c : split(s, ',')) p.push_back(parse_long(key, c));
  if (static_cast<int>(p.size()) != d) {
    throw ValidationError("config key '" + key + "': point '" + s + "' needs " + std::to_string(d) +
                          " coordinates");
  }
  return p;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "kernel", "dimension", "weights", "alpha", "radius", "scale", "H", "H.table", "tail",
      "law", "grid", "T", "h", "t_warm", "ratio", "x", "y", "lambda", "curve", "z", "fit",
      "fit.window", "seed", "n_replicas", "cap", "checkpoints", "x0", "horizon",
      "quad.rel_tol", "quad.max_level", "quad.level", "threads", "scenario", "out"};
  return keys;
}

}  // namespace

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

void Config::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw ValidationError("config key must not be empty");
  entries_[key] = value;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ValidationError("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double Config::number(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_double(key, it->second);
}

long Config::integer(const std::string& key, long fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  // Accept 1e6 style values when they are integral.
  const double v = parse_double(key, it->second);
  if (v != std::floor(v) || std::abs(v) > 9.0e18) {
    throw ValidationError("config key '" + key + "': not an integer: '" + it->second + "'");
  }
  return static_cast<long>(v);
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split(it->second, ',')) out.push_back(parse_double(key, item));
  return out;
}

std::vector<LatticePoint> Config::points(const std::string& key, int d,
                                         const std::vector<LatticePoint>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<LatticePoint> out;
  for (const auto& item : split(it->second, ';')) out.push_back(parse_point(key, item, d));
  if (out.empty()) throw ValidationError("config key '" + key + "' lists no points");
  return out;
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& [k, v] : entries_) {
    for (const char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

std::string Config::hash_hex() const {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << hash();
  return os.str();
}

std::string Config::summary() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    if (!out.empty()) out += ' ';
    out += k + "=" + v;
  }
  return out;
}

void Config::check_known_keys() const {
  for (const auto& [k, v] : entries_) {
    if (!known_keys().count(k)) throw ValidationError("unknown config key '" + k + "'");
  }
}

WalkKernel make_kernel(const Config& cfg) {
  const int d = static_cast<int>(cfg.integer("dimension", 1));
  if (d < 1) throw ValidationError("dimension must be >= 1");
  std::string kind = cfg.text("kernel", "nearest");
  if (kind == "finite-variance") kind = "weights";
  if (kind == "heavy-tail") kind = "heavy";
  if (kind == "nearest") return build_nearest_neighbor_kernel(d);
  if (kind == "weights") {
    if (!cfg.has("weights")) throw ValidationError("kernel = weights needs the 'weights' key");
    std::vector<JumpRate> w;
    for (const auto& item : split(cfg.text("weights", ""), ';')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ValidationError("weights entry '" + item + "' is not z:rate");
      w.push_back({parse_point("weights", trim(item.substr(0, colon)), d),
                   parse_double("weights", trim(item.substr(colon + 1)))});
    }
    return build_finite_variance_kernel(d, w);
  }
  if (kind == "heavy") {
    if (!cfg.has("alpha")) throw ValidationError("kernel = heavy needs 'alpha'");
    const double alpha = cfg.number("alpha", 1.0);
    const int radius = static_cast<int>(cfg.integer("radius", default_truncation_radius(d)));
    const double scale = cfg.number("scale", 1.0);
    const std::string tail = cfg.text("tail", "truncated");
    TailMode mode;
    if (tail == "truncated") {
      mode = TailMode::truncated;
    } else if (tail == "exact") {
      mode = TailMode::exact;
    } else {
      throw ValidationError("tail must be truncated or exact");
    }
    DirectionFunction H = DirectionFunction::constant(cfg.number("H", 1.0));
    if (cfg.has("H.table")) {
      std::vector<std::vector<double>> dirs;
      std::vector<double> vals;
      for (const auto& item : split(cfg.text("H.table", ""), ';')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ValidationError("H.table entry '" + item + "' is not u:value");
        std::vector<double> u;
        for (const auto& c : split(item.substr(0, colon), ',')) u.push_back(parse_double("H.table", c));
        if (static_cast<int>(u.size()) != d) throw ValidationError("H.table direction has wrong dimension");
        dirs.push_back(std::move(u));
        vals.push_back(parse_double("H.table", trim(item.substr(colon + 1))));
      }
      H = DirectionFunction::from_samples(std::move(dirs), std::move(vals));
    }
    return build_heavy_tail_kernel(d, alpha, H, radius, scale, mode);
  }
  throw ValidationError("kernel must be nearest, weights or heavy (got '" + kind + "')");
}

BranchingLaw make_law(const Config& cfg) {
  const std::string spec = cfg.text("law", "1,-1");
  if (spec.find(':') == std::string::npos) return BranchingLaw(cfg.numbers("law", {1.0, -1.0}));
  std::vector<double> b;
  for (const auto& item : split(spec, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("law entry '" + item + "' is not n:b_n");
    const long n = parse_long("law", trim(item.substr(0, colon)));
    if (n < 0 || n > 1000) throw ValidationError("law offspring number out of range");
    if (b.size() <= static_cast<std::size_t>(n)) b.resize(n + 1, 0.0);
    b[n] = parse_double("law", trim(item.substr(colon + 1)));
  }
  return BranchingLaw(std::move(b));
}

TimeGrid make_grid(const Config& cfg) {
  const std::string kind = cfg.text("grid", "uniform");
  const double T = cfg.number("T", 100.0);
  const double h = cfg.number("h", 0.05);
  if (kind == "uniform") return TimeGrid::uniform(T, h);
  if (kind == "geometric") {
    return TimeGrid::geometric_after_warmup(T, h, cfg.number("t_warm", 10.0), cfg.number("ratio", 1.1));
  }
  throw ValidationError("grid must be uniform or geometric");
}

unsigned thread_setting(const Config& cfg) {
  const long n = cfg.integer("threads", 0);
  if (n < 0) throw ValidationError("threads must be >= 0");
  return static_cast<unsigned>(n);
}

QuadratureOptions make_quadrature_options(const Config& cfg) {
  QuadratureOptions o;
  o.rel_tol = cfg.number("quad.rel_tol", 0.0);
  o.max_level = static_cast<int>(cfg.integer("quad.max_level", o.max_level));
  o.threads = thread_setting(cfg);
  return o;
}

VolterraOptions make_volterra_options(const Config& cfg) {
  VolterraOptions o;
  if (cfg.has("quad.level")) o.quadrature_level = static_cast<int>(cfg.integer("quad.level", 0));
  o.threads = thread_setting(cfg);
  return o;
}

SimConfig make_sim_config(const Config& cfg, std::shared_ptr<const WalkKernel> kernel) {
  SimConfig s;
  const int d = kernel->dimension();
  s.kernel = std::move(kernel);
  s.law = make_law(cfg);
  s.x0 = cfg.points("x0", d, {LatticePoint(d, 0)}).front();
  s.checkpoints = cfg.numbers("checkpoints", {1.0, 5.0, 10.0, 25.0});
  s.horizon = cfg.number("horizon", 0.0);
  const long cap = cfg.integer("cap", 1'000'000);
  if (cap < 1) throw ValidationError("cap must be >= 1");
  s.population_cap = static_cast<std::uint64_t>(cap);
  s.seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
  s.threads = thread_setting(cfg);
  return s;
}

void write_csv_preamble(std::ostream& out, const Config& cfg, const std::vector<std::string>& header) {
  out << "# config_hash=" << cfg.hash_hex() << ' ' << cfg.summary() << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
}

std::string format_point(const LatticePoint& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? " " : "") + std::to_string(x[i]);
  return s;
}

}  // namespace brw
