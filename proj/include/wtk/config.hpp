#pragma once
/// Run configuration: `key=value` lines, `#` comments, unknown keys rejected.
/// Every error carries the line number (or the flag name for overrides).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "measure.hpp"

namespace wtk {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what) {}
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> s{"evolve-pde",      "evolve-particles", "selfsim-profile",
                                          "assemble-selfsim", "identity-check",   "verify"};
  return s;
}

struct RunConfig {
  std::string scenario;
  // PDE grid.
  double x_min = 1e-4;
  double x_max = 1e2;
  int n_nodes = 240;
  double eps = 1e-3;
  double t_end = 5.0;
  double cadence = 0.1;
  double dt_max = 0.01;
  double cfl = 0.1;
  // Particles.
  std::uint64_t seed = 1;
  int replicas = 32;
  int particles = 10000;
  double absorb_threshold = 0.0;
  int threads = 0;  // 0: hardware concurrency
  // Initial datum and outputs.
  std::string initial = "uniform(1,2,1)";
  std::string out = "out";
  double delta = 0.1;
  double R = 10.0;
  // Self-similar profile.
  double energy = 1.0;
  double profile_h = 0.025;
  double profile_x_max = 60.0;
  double tol = 1e-3;
  double change_tol = 1e-6;
  int max_iterations = 5000;
  double M = 0.0;  // 0: 1.5 |Phi|_1 / sqrt(t0)
  double t0 = 1.0;
  // Identity check.
  std::vector<double> eps_ladder{1e-2, 3e-3, 1e-3};
  double phi_radius = 1.0;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("key '" + key + "': not a number: '" + v + "'");
  }
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw std::invalid_argument("key '" + key + "': not an integer: '" + v + "'");
  }
  return out;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_double(v[k]);
  return s;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field number_field(std::string key, T RunConfig::*m) {
  Field f;
  f.key = key;
  f.set = [key, m](RunConfig& c, const std::string& v) {
    if constexpr (std::is_floating_point_v<T>) {
      c.*m = to_double(key, v);
    } else {
      c.*m = to_int<T>(key, v);
    }
  };
  f.get = [m](const RunConfig& c) {
    if constexpr (std::is_floating_point_v<T>) {
      return format_double(c.*m);
    } else {
      return std::to_string(c.*m);
    }
  };
  return f;
}

inline Field string_field(std::string key, std::string RunConfig::*m) {
  return {key, [m](RunConfig& c, const std::string& v) { c.*m = v; },
          [m](const RunConfig& c) { return c.*m; }};
}

inline const std::vector<Field>& fields() {
  static const std::vector<Field> f = [] {
    std::vector<Field> v;
    v.push_back(string_field("scenario", &RunConfig::scenario));
    v.push_back(number_field("x_min", &RunConfig::x_min));
    v.push_back(number_field("x_max", &RunConfig::x_max));
    v.push_back(number_field("n_nodes", &RunConfig::n_nodes));
    v.push_back(number_field("eps", &RunConfig::eps));
    v.push_back(number_field("t_end", &RunConfig::t_end));
    v.push_back(number_field("cadence", &RunConfig::cadence));
    v.push_back(number_field("dt_max", &RunConfig::dt_max));
    v.push_back(number_field("cfl", &RunConfig::cfl));
    v.push_back(number_field("seed", &RunConfig::seed));
    v.push_back(number_field("replicas", &RunConfig::replicas));
    v.push_back(number_field("particles", &RunConfig::particles));
    v.push_back(number_field("absorb_threshold", &RunConfig::absorb_threshold));
    v.push_back(number_field("threads", &RunConfig::threads));
    v.push_back(string_field("initial", &RunConfig::initial));
    v.push_back(string_field("out", &RunConfig::out));
    v.push_back(number_field("delta", &RunConfig::delta));
    v.push_back(number_field("R", &RunConfig::R));
    v.push_back(number_field("energy", &RunConfig::energy));
    v.push_back(number_field("profile_h", &RunConfig::profile_h));
    v.push_back(number_field("profile_x_max", &RunConfig::profile_x_max));
    v.push_back(number_field("tol", &RunConfig::tol));
    v.push_back(number_field("change_tol", &RunConfig::change_tol));
    v.push_back(number_field("max_iterations", &RunConfig::max_iterations));
    v.push_back(number_field("M", &RunConfig::M));
    v.push_back(number_field("t0", &RunConfig::t0));
    v.push_back({"eps_ladder",
                 [](RunConfig& c, const std::string& s) {
                   c.eps_ladder.clear();
                   std::stringstream ss(s);
                   std::string item;
                   while (std::getline(ss, item, ',')) c.eps_ladder.push_back(to_double("eps_ladder", trim(item)));
                 },
                 [](const RunConfig& c) { return join(c.eps_ladder); }});
    v.push_back(number_field("phi_radius", &RunConfig::phi_radius));
    return v;
  }();
  return f;
}

}  // namespace detail

/// Parses `family(p1,p2,...)` into the family name and its parameters. The
/// profile_file family keeps its single argument as a path.
struct InitialSpec {
  std::string family;
  std::vector<double> params;
  std::string path;
};

inline InitialSpec parse_initial(const std::string& text) {
  const std::string s = detail::trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') {
    throw std::invalid_argument("key 'initial': expected family(params), got '" + s + "'");
  }
  InitialSpec spec;
  spec.family = detail::trim(s.substr(0, open));
  const std::string inner = s.substr(open + 1, s.size() - open - 2);
  if (spec.family == "profile_file") {
    spec.path = detail::trim(inner);
    if (spec.path.empty()) throw std::invalid_argument("key 'initial': profile_file needs a path");
    return spec;
  }
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) spec.params.push_back(detail::to_double("initial", detail::trim(item)));
  const std::map<std::string, std::size_t> arity{{"dirac0", 1}, {"uniform", 3}, {"powerlaw_half", 2}, {"twoatom", 4}};
  const auto it = arity.find(spec.family);
  if (it == arity.end()) throw std::invalid_argument("key 'initial': unknown family '" + spec.family + "'");
  if (spec.params.size() != it->second) {
    throw std::invalid_argument("key 'initial': " + spec.family + " takes " + std::to_string(it->second) +
                                " parameters");
  }
  const auto& p = spec.params;
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument("key 'initial': " + msg);
  };
  if (spec.family == "dirac0") need(p[0] >= 0.0, "dirac0 mass must be >= 0");
  if (spec.family == "uniform") need(p[0] >= 0.0 && p[1] > p[0] && p[2] > 0.0, "uniform needs 0 <= a < b and M > 0");
  if (spec.family == "powerlaw_half") need(p[0] > 0.0 && p[1] > p[0], "powerlaw_half needs 0 < x_min < x_max");
  if (spec.family == "twoatom") {
    need(p[0] >= 0.0 && p[1] >= 0.0 && p[2] >= 0.0 && p[3] >= 0.0 && p[2] + p[3] > 0.0,
         "twoatom needs positions >= 0 and weights >= 0 with positive total");
  }
  for (double v : p) need(std::isfinite(v), "parameters must be finite");
  return spec;
}

/// Range and cross-field checks; `where` maps a key to its source location.
inline void validate(const RunConfig& c, const std::function<std::string(const std::string&)>& where) {
  auto need = [&](bool ok, const std::string& key, const std::string& msg) {
    if (!ok) throw ConfigError(where(key), "key '" + key + "': " + msg);
  };
  need(!c.scenario.empty(), "scenario", "scenario is mandatory");
  bool known = false;
  for (const auto& s : scenario_names()) known = known || s == c.scenario;
  need(known, "scenario", "unknown scenario '" + c.scenario + "'");
  need(c.x_min > 0.0 && std::isfinite(c.x_min), "x_min", "must be > 0");
  need(c.x_max > c.x_min && std::isfinite(c.x_max), "x_max", "must exceed x_min");
  need(c.n_nodes >= 2 && c.n_nodes <= 100000, "n_nodes", "must be in [2, 100000]");
  need(c.eps >= 0.0 && std::isfinite(c.eps), "eps", "must be >= 0");
  need(c.scenario != "evolve-particles" || c.eps > 0.0, "eps", "must be > 0 for particles");
  need(c.t_end > 0.0 && std::isfinite(c.t_end), "t_end", "must be > 0");
  need(c.cadence > 0.0 && c.cadence <= c.t_end, "cadence", "must be in (0, t_end]");
  need(c.dt_max > 0.0, "dt_max", "must be > 0");
  need(c.cfl > 0.0 && c.cfl <= 1.0, "cfl", "must be in (0, 1]");
  need(c.replicas >= 1, "replicas", "must be >= 1");
  need(c.particles >= 2, "particles", "must be >= 2");
  need(c.absorb_threshold >= 0.0, "absorb_threshold", "must be >= 0");
  need(c.threads >= 0, "threads", "must be >= 0");
  need(!c.out.empty(), "out", "must not be empty");
  need(c.delta > 0.0, "delta", "must be > 0");
  need(c.R > 0.0, "R", "must be > 0");
  need(c.energy >= 0.0 && std::isfinite(c.energy), "energy", "must be >= 0");
  need(c.profile_h > 0.0 && c.profile_h <= 1.0, "profile_h", "must be in (0, 1]");
  need(c.profile_x_max > 1.0, "profile_x_max", "must be > 1");
  need(c.tol > 0.0, "tol", "must be > 0");
  need(c.change_tol > 0.0, "change_tol", "must be > 0");
  need(c.max_iterations >= 1, "max_iterations", "must be >= 1");
  need(c.M >= 0.0, "M", "must be >= 0");
  need(c.t0 > 0.0, "t0", "must be > 0");
  need(c.eps_ladder.size() >= 2, "eps_ladder", "needs at least two values");
  for (double e : c.eps_ladder) need(e > 0.0, "eps_ladder", "values must be > 0");
  need(c.phi_radius > 0.0, "phi_radius", "must be > 0");
  try {
    (void)parse_initial(c.initial);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where("initial"), e.what());
  }
}

/// Parses config text, then applies overrides (named by their flag) and
/// validates.
inline RunConfig parse_config(const std::string& text,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  RunConfig c;
  std::map<std::string, std::string> origin;
  auto find = [](const std::string& key) -> const detail::Field* {
    for (const auto& f : detail::fields()) {
      if (f.key == key) return &f;
    }
    return nullptr;
  };
  auto assign = [&](const std::string& key, const std::string& value, const std::string& where) {
    const detail::Field* f = find(key);
    if (!f) throw ConfigError(where, "unknown key '" + key + "'");
    try {
      f->set(c, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where, e.what());
    }
    origin[key] = where;
  };
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno);
    const auto hash = line.find('#');
    const std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "malformed line, expected key=value");
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError(where, "malformed line, empty key");
    assign(key, value, where);
  }
  for (const auto& [key, value] : overrides) assign(key, value, "--" + key);
  validate(c, [&](const std::string& key) {
    const auto it = origin.find(key);
    return it == origin.end() ? std::string("default") : it->second;
  });
  return c;
}

/// Effective configuration as parseable text, one key per line.
inline std::string echo_config(const RunConfig& c) {
  std::string s;
  for (const auto& f : detail::fields()) s += f.key + "=" + f.get(c) + "\n";
  return s;
}

}  // namespace wtk
