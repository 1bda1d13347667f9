#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nls/core.hpp"
#include "nls/relaxation.hpp"

namespace nls::harness {

enum class Scenario { convergence, invariant_table, error_growth, work_precision, semiclassical };
enum class Discretization { spectral, fem };
enum class RelaxKind { plain, single, multi };
enum class OutputFormat { csv, json };

std::string to_string(Scenario s);
std::string to_string(Discretization d);
Scenario parse_scenario(const std::string& text);

/// One method in the SP-ImEx4(R)(EC) naming scheme.
struct MethodSpec {
  Discretization disc = Discretization::spectral;
  std::string base = "ImEx4";  // S2, AK4, ImEx3 or ImEx4
  RelaxKind relax = RelaxKind::plain;
  bool adaptive = false;

  bool is_splitting() const { return base == "S2" || base == "AK4"; }
  /// "SP-S2", "FEM-ImEx4(MR)(EC)", ...
  std::string name() const;
};

/// Parses a method name. Without a "SP-"/"FEM-" prefix the discretization
/// is `fallback`. Throws ParseError (key "method") on malformed names or an
/// incompatible combination.
MethodSpec parse_method(const std::string& text, Discretization fallback = Discretization::spectral);

struct ExperimentConfig {
  Scenario scenario = Scenario::convergence;

  // problem
  std::string problem = "soliton";  // soliton | semiclassical
  int n = 2;
  double eps = 0.2;
  Phase phase = Phase::constant_phase;

  // discretization
  Discretization discretization = Discretization::spectral;
  Boundary bc = Boundary::periodic;  // FEM only; spectral is always periodic
  std::optional<std::size_t> m;
  std::optional<double> dx;

  std::vector<MethodSpec> methods;
  std::vector<double> dt;   // fixed steps, or initial steps for (EC) methods
  std::vector<double> tol;  // tau_abs = tau_rel for (EC) methods; empty keeps the controller's
  double T = 1.0;

  relaxation::ControllerConfig controller{};
  std::optional<int> q;  // controller exponent; defaults to the embedded order

  // scenario specifics
  std::size_t fit_points = 3;              // convergence: tail length of the slope fit
  double window_start = 2.0;               // error growth fit window
  double window_end = 15.0;
  double sample_interval = 0.0;            // error growth: 0 samples every accepted step
  std::vector<double> output_times;        // semiclassical density snapshots
  double reference_dt = 1e-4;
  std::size_t reference_refinement = 16;   // fine grid = refinement * m
  std::size_t repeat = 1;                  // work precision: runs per point, fastest kept

  std::string out;
  OutputFormat format = OutputFormat::csv;
  std::uint64_t seed = 0;

  /// Key/value pairs as given, in order, for the output echo.
  std::vector<std::pair<std::string, std::string>> echo;

  bool given(const std::string& key) const;

  /// Number of nodes: `m` when set, otherwise from `dx` and the domain
  /// (one more on a natural grid), otherwise the scenario default.
  std::size_t nodes(Boundary grid_bc = Boundary::periodic) const;
  double x_left() const;
  double x_right() const;
  Problem make_problem() const;
};

/// Flat key = value document. Entries are separated by newlines, or by a
/// comma or semicolon followed by the next `key=`. `#` starts a comment.
/// Lists are whitespace separated; numbers may be written as fractions
/// (1/25). Throws ParseError naming the offending key. A given `scenario`
/// fills in a missing scenario key and must match a present one.
ExperimentConfig parse_config(const std::string& text, std::optional<Scenario> scenario = {});
/// Throws IoError when the file cannot be read.
ExperimentConfig load_config(const std::string& path, std::optional<Scenario> scenario = {});

/// Applies `key = value` pairs to a parsed config, then re-validates once.
void apply_overrides(ExperimentConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv);
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Defaults and cross-field checks; throws ParseError.
void finalize(ExperimentConfig& cfg);

/// "1/25" -> 0.04; plain decimals otherwise.
double parse_number(const std::string& key, const std::string& text);

}  // namespace nls::harness
