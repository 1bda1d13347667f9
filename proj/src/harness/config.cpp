#include "nls/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nls/errors.hpp"

namespace nls::harness {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// True when text[pos..] reads `ident =` (after optional blanks).
bool key_follows(const std::string& text, std::size_t pos) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  const std::size_t start = pos;
  while (pos < text.size() && is_key_char(text[pos])) ++pos;
  if (pos == start || std::isdigit(static_cast<unsigned char>(text[start]))) return false;
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  return pos < text.size() && text[pos] == '=';
}

std::vector<std::string> split_entries(const std::string& doc) {
  std::vector<std::string> entries;
  std::istringstream lines(doc);
  std::string line;
  while (std::getline(lines, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::size_t begin = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == ',' || line[i] == ';') && key_follows(line, i + 1)) {
        entries.push_back(line.substr(begin, i - begin));
        begin = i + 1;
      }
    }
    entries.push_back(line.substr(begin));
  }
  std::vector<std::string> out;
  for (auto& e : entries) {
    std::string t = trim(e);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string cur;
  for (char c : value) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == ';') {
      if (!cur.empty()) items.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) items.push_back(std::move(cur));
  return items;
}

std::vector<double> parse_numbers(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(parse_number(key, item));
  if (out.empty()) throw ParseError(key, "expected at least one number");
  return out;
}

long long parse_integer(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw ParseError(key, "expected an integer, got '" + v + "'");
  }
  if (used != v.size()) throw ParseError(key, "expected an integer, got '" + v + "'");
  return x;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  const long long x = parse_integer(key, value);
  if (x <= 0) throw ParseError(key, "must be positive");
  return static_cast<std::size_t>(x);
}

double parse_positive(const std::string& key, const std::string& value) {
  const double x = parse_number(key, value);
  if (!(x > 0.0)) throw ParseError(key, "must be positive");
  return x;
}

Discretization parse_discretization(const std::string& key, const std::string& value) {
  const std::string v = lower(trim(value));
  if (v == "spectral" || v == "sp") return Discretization::spectral;
  if (v == "fem") return Discretization::fem;
  throw ParseError(key, "expected spectral or fem, got '" + value + "'");
}

void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "scenario") {
    cfg.scenario = parse_scenario(value);
  } else if (key == "problem") {
    const std::string v = lower(trim(value));
    if (v != "soliton" && v != "semiclassical")
      throw ParseError(key, "expected soliton or semiclassical, got '" + value + "'");
    cfg.problem = v;
  } else if (key == "n") {
    const long long n = parse_integer(key, value);
    if (n < 1 || n > 3) throw ParseError(key, "soliton count must be 1, 2 or 3");
    cfg.n = static_cast<int>(n);
  } else if (key == "eps") {
    cfg.eps = parse_positive(key, value);
  } else if (key == "phase") {
    const std::string v = lower(trim(value));
    if (v == "constant" || v == "constant_phase") {
      cfg.phase = Phase::constant_phase;
    } else if (v == "varying" || v == "varying_phase") {
      cfg.phase = Phase::varying_phase;
    } else {
      throw ParseError(key, "expected constant or varying, got '" + value + "'");
    }
  } else if (key == "discretization") {
    cfg.discretization = parse_discretization(key, value);
  } else if (key == "bc") {
    const std::string v = lower(trim(value));
    if (v == "periodic") {
      cfg.bc = Boundary::periodic;
    } else if (v == "natural") {
      cfg.bc = Boundary::natural;
    } else {
      throw ParseError(key, "expected periodic or natural, got '" + value + "'");
    }
  } else if (key == "m") {
    const std::size_t m = parse_count(key, value);
    if (m < 4) throw ParseError(key, "need at least 4 nodes");
    cfg.m = m;
  } else if (key == "dx") {
    cfg.dx = parse_positive(key, value);
  } else if (key == "method" || key == "methods") {
    cfg.methods.clear();
    for (const auto& item : split_list(value)) cfg.methods.push_back(parse_method(item));
    if (cfg.methods.empty()) throw ParseError(key, "expected at least one method");
  } else if (key == "dt") {
    cfg.dt = parse_numbers(key, value);
    for (double d : cfg.dt)
      if (!(d > 0.0)) throw ParseError(key, "step sizes must be positive");
  } else if (key == "tol") {
    cfg.tol = parse_numbers(key, value);
    for (double d : cfg.tol)
      if (!(d > 0.0)) throw ParseError(key, "tolerances must be positive");
  } else if (key == "T") {
    cfg.T = parse_number(key, value);
    if (!(cfg.T >= 0.0)) throw ParseError(key, "must be non-negative");
  } else if (key == "tau_abs") {
    cfg.controller.tau_abs = parse_number(key, value);
  } else if (key == "tau_rel") {
    cfg.controller.tau_rel = parse_number(key, value);
  } else if (key == "alpha") {
    cfg.controller.alpha = parse_number(key, value);
  } else if (key == "q") {
    const long long q = parse_integer(key, value);
    if (q < 1) throw ParseError(key, "must be >= 1");
    cfg.q = static_cast<int>(q);
  } else if (key == "conservation_tol") {
    cfg.controller.conservation_tol = parse_positive(key, value);
  } else if (key == "max_growth") {
    cfg.controller.max_growth = parse_number(key, value);
  } else if (key == "dt_min") {
    cfg.controller.dt_min = parse_number(key, value);
  } else if (key == "fit_points") {
    cfg.fit_points = parse_count(key, value);
  } else if (key == "window") {
    const auto w = parse_numbers(key, value);
    if (w.size() != 2 || !(w[0] > 0.0) || !(w[1] > w[0]))
      throw ParseError(key, "expected two increasing positive times");
    cfg.window_start = w[0];
    cfg.window_end = w[1];
  } else if (key == "sample_interval") {
    cfg.sample_interval = parse_number(key, value);
    if (cfg.sample_interval < 0.0) throw ParseError(key, "must be non-negative");
  } else if (key == "output_times") {
    cfg.output_times = parse_numbers(key, value);
  } else if (key == "reference_dt") {
    cfg.reference_dt = parse_positive(key, value);
  } else if (key == "reference_refinement") {
    cfg.reference_refinement = parse_count(key, value);
  } else if (key == "repeat") {
    cfg.repeat = parse_count(key, value);
  } else if (key == "out") {
    cfg.out = trim(value);
  } else if (key == "format") {
    const std::string v = lower(trim(value));
    if (v == "csv") {
      cfg.format = OutputFormat::csv;
    } else if (v == "json") {
      cfg.format = OutputFormat::json;
    } else {
      throw ParseError(key, "expected csv or json, got '" + value + "'");
    }
  } else if (key == "seed") {
    const long long s = parse_integer(key, value);
    if (s < 0) throw ParseError(key, "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  } else {
    throw ParseError(key, "unknown key");
  }
}

std::vector<MethodSpec> default_methods(Scenario s) {
  std::vector<std::string> names;
  switch (s) {
    case Scenario::convergence:
      names = {"SP-S2", "SP-AK4", "SP-ImEx3", "SP-ImEx3(R)", "SP-ImEx4", "SP-ImEx4(R)"};
      break;
    case Scenario::invariant_table:
      names = {"SP-S2", "SP-AK4", "SP-ImEx3", "SP-ImEx3(R)", "SP-ImEx4", "SP-ImEx4(R)"};
      break;
    case Scenario::error_growth:
      names = {"FEM-ImEx3(EC)", "FEM-ImEx4(EC)", "FEM-ImEx3(MR)(EC)", "FEM-ImEx4(MR)(EC)"};
      break;
    case Scenario::work_precision:
      names = {"SP-S2", "SP-AK4", "SP-ImEx4", "SP-ImEx4(R)", "SP-ImEx4(R)(EC)"};
      break;
    case Scenario::semiclassical:
      names = {"SP-S2", "SP-AK4", "SP-ImEx4", "SP-ImEx4(R)", "SP-ImEx4(R)(EC)"};
      break;
  }
  std::vector<MethodSpec> out;
  for (const auto& n : names) out.push_back(parse_method(n));
  return out;
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::convergence: return "convergence";
    case Scenario::invariant_table: return "invariants";
    case Scenario::error_growth: return "error-growth";
    case Scenario::work_precision: return "work-precision";
    case Scenario::semiclassical: return "semiclassical";
  }
  return "unknown";
}

std::string to_string(Discretization d) { return d == Discretization::fem ? "FEM" : "SP"; }

Scenario parse_scenario(const std::string& text) {
  std::string v = lower(trim(text));
  std::replace(v.begin(), v.end(), '-', '_');
  if (v == "convergence") return Scenario::convergence;
  if (v == "invariants" || v == "invariant_table") return Scenario::invariant_table;
  if (v == "error_growth") return Scenario::error_growth;
  if (v == "work_precision") return Scenario::work_precision;
  if (v == "semiclassical") return Scenario::semiclassical;
  throw ParseError("scenario", "unknown scenario '" + text + "'");
}

std::string MethodSpec::name() const {
  std::string s = to_string(disc) + "-" + base;
  if (relax == RelaxKind::single) s += "(R)";
  if (relax == RelaxKind::multi) s += "(MR)";
  if (adaptive) s += "(EC)";
  return s;
}

MethodSpec parse_method(const std::string& text, Discretization fallback) {
  const std::string key = "method";
  std::string rest = trim(text);
  if (rest.empty()) throw ParseError(key, "empty method name");
  MethodSpec spec;
  spec.disc = fallback;
  if (rest.rfind("SP-", 0) == 0) {
    spec.disc = Discretization::spectral;
    rest = rest.substr(3);
  } else if (rest.rfind("FEM-", 0) == 0) {
    spec.disc = Discretization::fem;
    rest = rest.substr(4);
  }
  const std::size_t paren = rest.find('(');
  spec.base = rest.substr(0, paren);
  if (spec.base != "S2" && spec.base != "AK4" && spec.base != "ImEx3" && spec.base != "ImEx4")
    throw ParseError(key, "unknown method '" + text + "'");
  std::string tags = paren == std::string::npos ? "" : rest.substr(paren);
  bool have_relax = false;
  while (!tags.empty()) {
    const std::size_t close = tags.find(')');
    if (tags[0] != '(' || close == std::string::npos)
      throw ParseError(key, "malformed method name '" + text + "'");
    const std::string tag = tags.substr(1, close - 1);
    tags = tags.substr(close + 1);
    if (tag == "R" || tag == "MR") {
      if (have_relax || spec.adaptive)
        throw ParseError(key, "malformed method name '" + text + "'");
      spec.relax = tag == "R" ? RelaxKind::single : RelaxKind::multi;
      have_relax = true;
    } else if (tag == "EC") {
      if (spec.adaptive) throw ParseError(key, "malformed method name '" + text + "'");
      spec.adaptive = true;
    } else {
      throw ParseError(key, "unknown tag '(" + tag + ")' in '" + text + "'");
    }
  }
  if (spec.is_splitting()) {
    if (spec.disc != Discretization::spectral)
      throw ParseError(key, "'" + text + "': splitting methods require the spectral discretization");
    if (spec.relax != RelaxKind::plain || spec.adaptive)
      throw ParseError(key, "'" + text + "': splitting methods take no (R), (MR) or (EC) tags");
  }
  if (spec.relax == RelaxKind::multi && spec.disc != Discretization::fem)
    throw ParseError(key, "'" + text +
                              "': multiple relaxation requires an energy-conserving "
                              "semi-discretization (FEM)");
  return spec;
}

bool ExperimentConfig::given(const std::string& key) const {
  return std::any_of(echo.begin(), echo.end(), [&](const auto& kv) { return kv.first == key; });
}

double ExperimentConfig::x_left() const { return problem == "semiclassical" ? -8.0 : -35.0; }
double ExperimentConfig::x_right() const { return problem == "semiclassical" ? 8.0 : 35.0; }

std::size_t ExperimentConfig::nodes(Boundary grid_bc) const {
  if (m) return *m;
  const double L = x_right() - x_left();
  if (dx) {
    const auto cells = static_cast<std::size_t>(std::llround(L / *dx));
    return grid_bc == Boundary::natural ? cells + 1 : cells;
  }
  if (problem == "semiclassical") return static_cast<std::size_t>(std::llround(L * 32.0));
  if (scenario == Scenario::error_growth) return 4480;
  return n == 3 ? 2240 : 1120;
}

Problem ExperimentConfig::make_problem() const {
  return problem == "semiclassical" ? semiclassical_problem(eps, phase) : soliton_problem(n);
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  auto whole = [&](const std::string& s) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ParseError(key, "expected a number, got '" + v + "'");
    }
    if (used != s.size()) throw ParseError(key, "expected a number, got '" + v + "'");
    return x;
  };
  if (const auto slash = v.find('/'); slash != std::string::npos) {
    const double num = whole(trim(v.substr(0, slash)));
    const double den = whole(trim(v.substr(slash + 1)));
    if (den == 0.0) throw ParseError(key, "division by zero in '" + v + "'");
    return num / den;
  }
  return whole(v);
}

ExperimentConfig parse_config(const std::string& text, std::optional<Scenario> scenario) {
  const auto entries = split_entries(text);
  if (entries.empty()) throw ParseError("", "empty configuration");
  ExperimentConfig cfg;
  for (const auto& entry : entries) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) throw ParseError("", "expected key = value, got '" + entry + "'");
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    if (key.empty()) throw ParseError("", "missing key in '" + entry + "'");
    if (cfg.given(key)) throw ParseError(key, "duplicate key");
    set_key(cfg, key, value);
    cfg.echo.emplace_back(key, value);
  }
  if (scenario) {
    if (cfg.given("scenario") && cfg.scenario != *scenario)
      throw ParseError("scenario", "config is for '" + to_string(cfg.scenario) + "', not '" +
                                       to_string(*scenario) + "'");
    cfg.scenario = *scenario;
  }
  finalize(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, std::optional<Scenario> scenario) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), scenario);
}

void apply_overrides(ExperimentConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "scenario") throw ParseError(key, "the scenario cannot be overridden");
    set_key(cfg, key, value);
    auto it = std::find_if(cfg.echo.begin(), cfg.echo.end(), [&](const auto& e) { return e.first == key; });
    if (it != cfg.echo.end()) {
      it->second = value;
    } else {
      cfg.echo.emplace_back(key, value);
    }
  }
  finalize(cfg);
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  apply_overrides(cfg, {{key, value}});
}

void finalize(ExperimentConfig& cfg) {
  const bool semi_default =
      cfg.scenario == Scenario::semiclassical || cfg.scenario == Scenario::work_precision;
  if (!cfg.given("problem") && semi_default) cfg.problem = "semiclassical";

  // A discretization key re-targets unprefixed method names.
  if (cfg.given("method") || cfg.given("methods")) {
    std::string value;
    for (const auto& [k, v] : cfg.echo)
      if (k == "method" || k == "methods") value = v;
    cfg.methods.clear();
    for (const auto& item : split_list(value))
      cfg.methods.push_back(parse_method(item, cfg.discretization));
  } else {
    cfg.methods = default_methods(cfg.scenario);
    if (cfg.given("discretization"))
      for (auto& mth : cfg.methods)
        if (!mth.is_splitting()) mth.disc = cfg.discretization;
    if (cfg.given("discretization") && cfg.discretization == Discretization::fem)
      cfg.methods.erase(std::remove_if(cfg.methods.begin(), cfg.methods.end(),
                                       [](const MethodSpec& m) { return m.is_splitting(); }),
                        cfg.methods.end());
  }
  if (cfg.methods.empty()) throw ParseError("method", "no methods selected");

  if (!cfg.given("T")) {
    switch (cfg.scenario) {
      case Scenario::convergence: cfg.T = 1.0; break;
      case Scenario::invariant_table: cfg.T = 5.0; break;
      case Scenario::error_growth: cfg.T = 20.0; break;
      case Scenario::work_precision: cfg.T = 0.8; break;
      case Scenario::semiclassical: cfg.T = 0.8; break;
    }
  }
  if (!cfg.given("dt")) {
    switch (cfg.scenario) {
      case Scenario::convergence: cfg.dt = {1.0 / 25, 1.0 / 50, 1.0 / 100, 1.0 / 200, 1.0 / 400}; break;
      case Scenario::invariant_table: cfg.dt = {0.01}; break;
      case Scenario::error_growth: cfg.dt = {0.01}; break;
      case Scenario::work_precision: cfg.dt = {1.0 / 50, 1.0 / 100, 1.0 / 200, 1.0 / 400, 1.0 / 800}; break;
      case Scenario::semiclassical: cfg.dt = {1.0 / 100}; break;
    }
  }
  if (!cfg.given("tol")) {
    switch (cfg.scenario) {
      case Scenario::error_growth: cfg.tol = {1e-6}; break;
      case Scenario::work_precision: cfg.tol = {1e-4, 1e-5, 1e-6, 1e-7, 1e-8}; break;
      case Scenario::semiclassical: cfg.tol = {1e-6}; break;
      default: cfg.tol.clear(); break;
    }
  }
  if (!cfg.given("dx") && !cfg.given("m") && cfg.problem == "semiclassical") {
    // Default meshes follow h = O(eps): 1/32 at eps = 0.2, scaled with eps.
    cfg.dx = std::min(1.0 / 32.0, 1.0 / 32.0 * (cfg.eps / 0.2));
  }
  if (cfg.given("dx")) {
    const double cells = (cfg.x_right() - cfg.x_left()) / *cfg.dx;
    if (std::abs(cells - std::round(cells)) > 1e-9 * cells)
      throw ParseError("dx", "does not divide the domain length into whole cells");
  }
  if (cfg.dx && !cfg.given("dx")) {
    const double cells = (cfg.x_right() - cfg.x_left()) / *cfg.dx;
    cfg.dx = (cfg.x_right() - cfg.x_left()) / std::round(cells);
  }
  if (cfg.nodes() < 4) throw ParseError(cfg.given("dx") ? "dx" : "m", "need at least 4 nodes");
  if (!cfg.given("output_times")) cfg.output_times = {0.0, cfg.T};
  for (double t : cfg.output_times)
    if (t < 0.0 || t > cfg.T) throw ParseError("output_times", "times must lie in [0, T]");

  if (cfg.problem == "semiclassical" && cfg.given("n")) throw ParseError("n", "not used by semiclassical problems");
  if (cfg.problem == "soliton" && cfg.given("eps")) throw ParseError("eps", "not used by soliton problems");
  const bool any_fem = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                   [](const MethodSpec& m) { return m.disc == Discretization::fem; });
  if (cfg.bc == Boundary::natural && !any_fem)
    throw ParseError("bc", "natural boundaries need an FEM method; spectral runs are periodic");
  if (cfg.bc == Boundary::natural && cfg.problem == "semiclassical")
    throw ParseError("bc", "semiclassical runs are compared against a periodic reference");
  if (cfg.scenario == Scenario::convergence && cfg.problem != "soliton")
    throw ParseError("problem", "convergence runs compare against the exact soliton");
  if (cfg.scenario == Scenario::error_growth && cfg.problem != "soliton")
    throw ParseError("problem", "error growth compares against the exact soliton");
  if (cfg.fit_points < 2) throw ParseError("fit_points", "need at least 2 points");

  try {
    relaxation::validate(cfg.controller);
  } catch (const ConfigError& e) {
    throw ParseError("controller", e.what());
  }
}

}  // namespace nls::harness
