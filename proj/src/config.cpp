#include "discoflux/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "discoflux/csv.hpp"
#include "discoflux/errors.hpp"

namespace discoflux {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a real number");
  }
  return d;
}

long long to_integer(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long d = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  }
  return d;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string join_reals(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_real(xs[i]);
  return s;
}

std::string join_ints(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

struct Key {
  std::string name;
  std::string type;
  std::string doc;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Key real_key(std::string name, T ExperimentConfig::*field, std::string doc) {
  return {name, "real", std::move(doc),
          [field, name](ExperimentConfig& c, const std::string& v) { c.*field = to_real(name, v); },
          [field](const ExperimentConfig& c) { return format_real(c.*field); }};
}

template <typename T>
Key int_key(std::string name, T ExperimentConfig::*field, std::string doc) {
  return {name, "int", std::move(doc),
          [field, name](ExperimentConfig& c, const std::string& v) {
            c.*field = static_cast<T>(to_integer(name, v));
          },
          [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

Key string_key(std::string name, std::string ExperimentConfig::*field, std::string doc) {
  return {name, "string", std::move(doc),
          [field](ExperimentConfig& c, const std::string& v) { c.*field = v; },
          [field](const ExperimentConfig& c) { return c.*field; }};
}

Key bool_key(std::string name, bool ExperimentConfig::*field, std::string doc) {
  return {name, "bool", std::move(doc),
          [field, name](ExperimentConfig& c, const std::string& v) {
            if (v == "true" || v == "1") {
              c.*field = true;
            } else if (v == "false" || v == "0") {
              c.*field = false;
            } else {
              throw ConfigError("key '" + name + "': '" + v + "' is not a boolean");
            }
          },
          [field](const ExperimentConfig& c) { return std::string(c.*field ? "true" : "false"); }};
}

Key reals_key(std::string name, std::vector<double> ExperimentConfig::*field, std::string doc) {
  return {name, "real list", std::move(doc),
          [field, name](ExperimentConfig& c, const std::string& v) {
            std::vector<double> xs;
            for (const auto& s : split_list(v)) xs.push_back(to_real(name, s));
            c.*field = xs;
          },
          [field](const ExperimentConfig& c) { return join_reals(c.*field); }};
}

Key ints_key(std::string name, std::vector<int> ExperimentConfig::*field, std::string doc) {
  return {name, "int list", std::move(doc),
          [field, name](ExperimentConfig& c, const std::string& v) {
            std::vector<int> xs;
            for (const auto& s : split_list(v)) xs.push_back(static_cast<int>(to_integer(name, s)));
            c.*field = xs;
          },
          [field](const ExperimentConfig& c) { return join_ints(c.*field); }};
}

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = [] {
    using C = ExperimentConfig;
    std::vector<Key> k;
    k.push_back(reals_key("lambda_breaks", &C::lambda_breaks, "breakpoints of the speed on [0,1), ascending"));
    k.push_back(reals_key("lambda_values", &C::lambda_values, "speed value on each piece [b_i, b_{i+1})"));
    k.push_back(string_key("rate", &C::rate, "jump rate g: indicator | identity | table:v1,v2,..."));
    k.push_back(string_key("closure", &C::closure, "h: rate (h = R^-1 of g) | convex | concave"));
    k.push_back(real_key("rho_m", &C::rho_m, "extremum of the quadratic convex/concave closure"));
    k.push_back(real_key("rho_max", &C::rho_max, "closure density cap"));
    k.push_back(real_key("sigma", &C::sigma, "particle mollification eps = N^-sigma; <= 0 uses the raw speed"));
    k.push_back(string_key("initial", &C::initial, "initial data: constant | pieces | steady | table"));
    k.push_back(real_key("rho_const", &C::rho_const, "density for initial=constant"));
    k.push_back(reals_key("rho_pieces", &C::rho_pieces, "one density per speed piece for initial=pieces"));
    k.push_back(reals_key("rho_table", &C::rho_table, "densities on equal cells of [0,1) for initial=table"));
    k.push_back(real_key("alpha", &C::alpha, "flux level for initial=steady"));
    k.push_back(ints_key("n_ladder", &C::n_ladder, "lattice sizes N, strictly increasing"));
    k.push_back(int_key("replicas", &C::replicas, "ensemble size M (>= 2)"));
    k.push_back(int_key("block_radius", &C::block_radius, "block radius l for l_schedule=fixed"));
    k.push_back(string_key("l_schedule", &C::l_schedule, "fixed | quarter (l = floor(N^(1/4)))"));
    k.push_back(int_key("bins", &C::bins, "macro-cells for L1 errors and Young-measure variances"));
    k.push_back(int_key("sites", &C::sites, "lattice size for the zrp and couple subcommands"));
    k.push_back(int_key("checkpoints", &C::checkpoints, "discrepancy checkpoints for couple"));
    k.push_back(real_key("couple_alpha", &C::couple_alpha, "invariant level of the reference marginal xi"));
    k.push_back(int_key("event_budget", &C::event_budget, "per-run event cap, -1 for none"));
    k.push_back(real_key("horizon", &C::horizon, "final time t"));
    k.push_back(int_key("ref_cells", &C::ref_cells, "cells of the fine-grid reference solve (>= 4000)"));
    k.push_back(int_key("cells", &C::cells, "cells for solve, steady and audit"));
    k.push_back(real_key("epsilon", &C::epsilon, "mollification width for solve, steady and audit (0 = none)"));
    k.push_back(real_key("eps0", &C::eps0, "coarsest epsilon of the epsilon study"));
    k.push_back(int_key("eps_levels", &C::eps_levels, "solves in the epsilon study (0 skips it)"));
    k.push_back(reals_key("snapshot_times", &C::snapshot_times, "output times for solve and zrp"));
    k.push_back(reals_key("alphas", &C::alphas, "flux levels for steady"));
    k.push_back(int_key("audit_intervals", &C::audit_intervals, "time intervals of the entropy audit quadrature"));
    k.push_back(int_key("alpha_count", &C::alpha_count, "size of the audit alpha library"));
    k.push_back(bool_key("timing", &C::timing, "record wall_seconds (false writes 0 for byte-stable output)"));
    k.push_back(bool_key("checks", &C::checks, "evaluate acceptance checks and exit 2 on failure"));
    k.push_back({"seed", "u64", "master seed",
                 [](C& c, const std::string& v) {
                   errno = 0;
                   char* end = nullptr;
                   const auto s = std::strtoull(v.c_str(), &end, 10);
                   if (v.empty() || v[0] == '-' || end != v.c_str() + v.size() || errno == ERANGE) {
                     throw ConfigError("key 'seed': '" + v + "' is not an unsigned integer");
                   }
                   c.seed = s;
                 },
                 [](const C& c) { return std::to_string(c.seed); }});
    k.push_back(string_key("output", &C::output, "output directory"));
    k.push_back(int_key("threads", &C::threads, "worker threads"));
    return k;
  }();
  return keys;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::stringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = registry();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == key; });
    if (it == keys.end()) {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + key + "' repeated");
    }
    it->set(base, value);
  }
  return base;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.lambda_breaks.empty() || c.lambda_breaks.size() != c.lambda_values.size()) {
    fail("lambda_breaks and lambda_values need the same positive length");
  }
  for (double v : c.lambda_values) {
    if (!(v > 0.0)) fail("lambda_values must be positive");
  }
  if (c.closure != "rate" && c.closure != "convex" && c.closure != "concave") {
    fail("closure must be rate, convex or concave");
  }
  if (c.initial != "constant" && c.initial != "pieces" && c.initial != "steady" && c.initial != "table") {
    fail("initial must be constant, pieces, steady or table");
  }
  if (c.initial == "pieces" && c.rho_pieces.size() != c.lambda_values.size()) {
    fail("rho_pieces needs one density per speed piece");
  }
  if (c.initial == "table" && c.rho_table.empty()) fail("rho_table is empty");
  for (std::size_t i = 0; i < c.n_ladder.size(); ++i) {
    if (c.n_ladder[i] <= 0) fail("n_ladder entries must be positive");
    if (i > 0 && c.n_ladder[i] <= c.n_ladder[i - 1]) fail("n_ladder must be strictly increasing");
  }
  if (c.replicas < 2) fail("replicas must be at least 2");
  if (c.block_radius < 0) fail("block_radius must be nonnegative");
  if (c.l_schedule != "fixed" && c.l_schedule != "quarter") fail("l_schedule must be fixed or quarter");
  if (c.bins <= 0) fail("bins must be positive");
  if (c.sites <= 2) fail("sites must exceed 2");
  if (c.checkpoints <= 0) fail("checkpoints must be positive");
  if (!(c.horizon >= 0.0)) fail("horizon must be nonnegative");
  if (c.ref_cells <= 0 || c.cells <= 0) fail("cell counts must be positive");
  if (!(c.epsilon >= 0.0) || !(c.eps0 > 0.0)) fail("epsilon must be nonnegative and eps0 positive");
  if (c.eps_levels < 0) fail("eps_levels must be nonnegative");
  for (std::size_t i = 0; i < c.snapshot_times.size(); ++i) {
    if (c.snapshot_times[i] < 0.0 || c.snapshot_times[i] > c.horizon) {
      fail("snapshot_times must lie in [0, horizon]");
    }
    if (i > 0 && c.snapshot_times[i] < c.snapshot_times[i - 1]) fail("snapshot_times must ascend");
  }
  if (c.audit_intervals <= 0 || c.alpha_count <= 0) fail("audit sizes must be positive");
  if (c.threads <= 0) fail("threads must be positive");
}

std::string config_help() {
  std::string out = "Config keys (key = value, '#' comments, lists comma-separated):\n";
  const ExperimentConfig defaults;
  for (const auto& k : registry()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "  %-16s %-10s ", k.name.c_str(), k.type.c_str());
    out += buf + k.doc + " [default: " + k.get(defaults) + "]\n";
  }
  return out;
}

std::string dump_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& k : registry()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

}  // namespace discoflux
