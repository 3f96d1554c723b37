#include "bsdelab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "bsdelab/catalog.hpp"
#include "bsdelab/errors.hpp"

namespace bsdelab {

namespace {
std::string trim(std::string s) {
  const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(s.front())) s.erase(s.begin());
  while (!s.empty() && issp(s.back())) s.pop_back();
  return s;
}

double to_double(const std::string& v, int line, const std::string& field) {
  const std::string t = trim(v);
  double out;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || p != t.data() + t.size())
    throw ConfigError("expected a number for '" + field + "', got '" + t + "'", line, field);
  return out;
}

template <typename Int>
Int to_int(const std::string& v, int line, const std::string& field) {
  const std::string t = trim(v);
  Int out;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || p != t.data() + t.size())
    throw ConfigError("expected an integer for '" + field + "', got '" + t + "'", line, field);
  return out;
}

bool to_bool(const std::string& v, int line, const std::string& field) {
  const std::string t = trim(v);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError("expected true/false for '" + field + "', got '" + t + "'", line, field);
}

template <typename T, typename Parse>
std::vector<T> to_list(const std::string& v, int line, const std::string& field, Parse parse) {
  std::vector<T> out;
  std::string item;
  std::stringstream ss(v);
  while (std::getline(ss, item, ',')) out.push_back(parse(trim(item), line, field));
  if (out.empty()) throw ConfigError("empty list for '" + field + "'", line, field);
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, double>)
      out += fmt(xs[i]);
    else
      out += std::to_string(xs[i]);
  }
  return out;
}

bool contains(const std::vector<std::string>& xs, const std::string& x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}
}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source_name) {
  ExperimentConfig cfg;
  std::string line;
  std::string section;
  int lineno = 0;

  const std::vector<std::string> known_sections = {
      "instance", "generator", "terminal",  "psi",   "grid",       "ensemble", "solver",
      "truncation", "stopping", "psi_check", "gauss", "uniqueness", "output",   "run"};

  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(source_name + ": unterminated section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      if (!contains(known_sections, section))
        throw ConfigError(source_name + ": unknown section [" + section + "]", lineno,
                          section);
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source_name + ": expected 'key = value'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source_name + ": empty key", lineno);
    const std::string field = section + "." + key;

    if (section == "run") continue;  // emitted by the tool; informational

    bool ok = true;
    if (section == "instance") {
      if (key == "name")
        cfg.name = value;
      else
        ok = false;
    } else if (section == "generator") {
      if (key == "driver")
        cfg.driver = value;
      else if (key == "f0")
        cfg.f0 = value;
      else if (key == "f0_value")
        cfg.f0_value = to_double(value, lineno, field);
      else if (key == "beta")
        cfg.beta = to_double(value, lineno, field);
      else if (key == "gamma")
        cfg.gamma = to_double(value, lineno, field);
      else
        ok = false;
    } else if (section == "terminal") {
      if (key == "kind")
        cfg.terminal = value;
      else if (key == "c")
        cfg.terminal_c = to_double(value, lineno, field);
      else
        ok = false;
    } else if (section == "psi") {
      if (key == "mu")
        cfg.mu = to_double(value, lineno, field);
      else
        ok = false;
    } else if (section == "grid") {
      if (key == "T")
        cfg.T = to_double(value, lineno, field);
      else if (key == "n_steps")
        cfg.n_steps = to_int<int>(value, lineno, field);
      else
        ok = false;
    } else if (section == "ensemble") {
      if (key == "d")
        cfg.d = to_int<int>(value, lineno, field);
      else if (key == "M")
        cfg.M = to_int<std::uint64_t>(value, lineno, field);
      else if (key == "seed")
        cfg.seed = to_int<std::uint64_t>(value, lineno, field);
      else
        ok = false;
    } else if (section == "solver") {
      if (key == "basis_degree")
        cfg.basis_degree = to_int<int>(value, lineno, field);
      else if (key == "theta")
        cfg.theta = to_double(value, lineno, field);
      else if (key == "tol")
        cfg.tol = to_double(value, lineno, field);
      else if (key == "max_iter")
        cfg.max_iter = to_int<int>(value, lineno, field);
      else if (key == "ridge")
        cfg.ridge = to_double(value, lineno, field);
      else
        ok = false;
    } else if (section == "truncation") {
      if (key == "n_levels")
        cfg.n_levels = to_list<int>(value, lineno, field, to_int<int>);
      else if (key == "p_levels")
        cfg.p_levels = to_list<int>(value, lineno, field, to_int<int>);
      else
        ok = false;
    } else if (section == "stopping") {
      if (key == "levels")
        cfg.levels = to_list<double>(value, lineno, field, to_double);
      else
        ok = false;
    } else if (section == "psi_check") {
      if (key == "samples")
        cfg.psi_samples = to_int<std::uint64_t>(value, lineno, field);
      else if (key == "seed")
        cfg.psi_seed = to_int<std::uint64_t>(value, lineno, field);
      else if (key == "x_max")
        cfg.psi_x_max = to_double(value, lineno, field);
      else if (key == "param_max")
        cfg.psi_param_max = to_double(value, lineno, field);
      else
        ok = false;
    } else if (section == "gauss") {
      if (key == "from_step")
        cfg.from_step = to_int<int>(value, lineno, field);
      else
        ok = false;
    } else if (section == "uniqueness") {
      if (key == "seed_b")
        cfg.seed_b = to_int<std::uint64_t>(value, lineno, field);
      else if (key == "basis_degree_b")
        cfg.basis_degree_b = to_int<int>(value, lineno, field);
      else if (key == "allowance")
        cfg.allowance = to_double(value, lineno, field);
      else if (key == "rep_tolerance")
        cfg.rep_tolerance = to_double(value, lineno, field);
      else if (key == "negative_control")
        cfg.negative_control = to_bool(value, lineno, field);
      else
        ok = false;
    } else if (section == "output") {
      if (key == "dir")
        cfg.dir = value;
      else
        ok = false;
    } else {
      throw ConfigError(source_name + ": key outside any section", lineno, key);
    }
    if (!ok)
      throw ConfigError(source_name + ": unknown key '" + key + "' in [" + section + "]",
                        lineno, field);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  out += "[instance]\nname = " + c.name + "\n\n";
  out += "[generator]\ndriver = " + c.driver + "\nf0 = " + c.f0 +
         "\nf0_value = " + fmt(c.f0_value) + "\nbeta = " + fmt(c.beta) +
         "\ngamma = " + fmt(c.gamma) + "\n\n";
  out += "[terminal]\nkind = " + c.terminal + "\nc = " + fmt(c.terminal_c) + "\n\n";
  out += "[psi]\nmu = " + fmt(c.mu) + "\n\n";
  out += "[grid]\nT = " + fmt(c.T) + "\nn_steps = " + std::to_string(c.n_steps) + "\n\n";
  out += "[ensemble]\nd = " + std::to_string(c.d) + "\nM = " + std::to_string(c.M) +
         "\nseed = " + std::to_string(c.seed) + "\n\n";
  out += "[solver]\nbasis_degree = " + std::to_string(c.basis_degree) +
         "\ntheta = " + fmt(c.theta) + "\ntol = " + fmt(c.tol) +
         "\nmax_iter = " + std::to_string(c.max_iter) + "\nridge = " + fmt(c.ridge) + "\n\n";
  out += "[truncation]\nn_levels = " + join(c.n_levels) + "\np_levels = " + join(c.p_levels) +
         "\n\n";
  out += "[stopping]\nlevels = " + join(c.levels) + "\n\n";
  out += "[psi_check]\nsamples = " + std::to_string(c.psi_samples) +
         "\nseed = " + std::to_string(c.psi_seed) + "\nx_max = " + fmt(c.psi_x_max) +
         "\nparam_max = " + fmt(c.psi_param_max) + "\n\n";
  out += "[gauss]\nfrom_step = " + std::to_string(c.from_step) + "\n\n";
  out += "[uniqueness]\nseed_b = " + std::to_string(c.seed_b) +
         "\nbasis_degree_b = " + std::to_string(c.basis_degree_b) +
         "\nallowance = " + fmt(c.allowance) + "\nrep_tolerance = " + fmt(c.rep_tolerance) +
         "\nnegative_control = " + (c.negative_control ? "true" : "false") + "\n\n";
  out += "[output]\ndir = " + c.dir + "\n";
  return out;
}

void validate(const ExperimentConfig& c) {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("invalid config: " + field + " " + why, 0, field);
  };
  if (!contains(catalog_drivers(), c.driver)) fail("generator.driver", "is not in the catalog");
  if (!contains(catalog_intercepts(), c.f0)) fail("generator.f0", "is not in the catalog");
  if (!contains(catalog_terminals(), c.terminal)) fail("terminal.kind", "is not in the catalog");
  if (!std::isfinite(c.f0_value)) fail("generator.f0_value", "must be finite");
  if (!(std::isfinite(c.beta) && c.beta >= 0.0)) fail("generator.beta", "must be >= 0");
  if (!(std::isfinite(c.gamma) && c.gamma > 0.0)) fail("generator.gamma", "must be > 0");
  if (!std::isfinite(c.terminal_c)) fail("terminal.c", "must be finite");
  if (!(std::isfinite(c.mu) && c.mu > 0.0)) fail("psi.mu", "must be > 0");
  if (!(std::isfinite(c.T) && c.T > 0.0)) fail("grid.T", "must be > 0");
  if (c.n_steps < 1) fail("grid.n_steps", "must be >= 1");
  if (c.d < 1) fail("ensemble.d", "must be >= 1");
  if (c.M < 1) fail("ensemble.M", "must be >= 1");
  if (c.basis_degree < 0) fail("solver.basis_degree", "must be >= 0");
  if (!(c.theta >= 0.0 && c.theta <= 1.0)) fail("solver.theta", "must lie in [0, 1]");
  if (!(std::isfinite(c.tol) && c.tol > 0.0)) fail("solver.tol", "must be > 0");
  if (c.max_iter < 1) fail("solver.max_iter", "must be >= 1");
  if (!(std::isfinite(c.ridge) && c.ridge >= 0.0)) fail("solver.ridge", "must be >= 0");
  for (int n : c.n_levels)
    if (n < 1) fail("truncation.n_levels", "entries must be >= 1");
  for (int p : c.p_levels)
    if (p < 1) fail("truncation.p_levels", "entries must be >= 1");
  for (double l : c.levels)
    if (!(std::isfinite(l) && l > 0.0)) fail("stopping.levels", "entries must be > 0");
  if (c.psi_samples < 1) fail("psi_check.samples", "must be >= 1");
  if (!(std::isfinite(c.psi_x_max) && c.psi_x_max > 0.0)) fail("psi_check.x_max", "must be > 0");
  if (!(std::isfinite(c.psi_param_max) && c.psi_param_max > 0.0))
    fail("psi_check.param_max", "must be > 0");
  if (c.from_step < 0 || c.from_step > c.n_steps)
    fail("gauss.from_step", "must lie in [0, n_steps]");
  if (c.basis_degree_b < 0) fail("uniqueness.basis_degree_b", "must be >= 0");
  if (!(std::isfinite(c.allowance) && c.allowance >= 0.0))
    fail("uniqueness.allowance", "must be >= 0");
  if (!(std::isfinite(c.rep_tolerance) && c.rep_tolerance >= 0.0))
    fail("uniqueness.rep_tolerance", "must be >= 0");
  if (c.terminal == "exp_sq_w_t" && !(c.terminal_c < 0.5 / c.T))
    fail("terminal.c", "must be < 1/(2T) for exp_sq_w_t");
}

}  // namespace bsdelab
