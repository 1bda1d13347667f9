#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nls/core.hpp"
#include "nls/harness/config.hpp"
#include "nls/harness/record.hpp"
#include "nls/spectral.hpp"

namespace nls::harness {

struct RunOutcome {
  std::string label;
  MethodSpec method;
  double dt = 0.0;
  double tol = 0.0;  // 0 when the controller's own tolerances were used
  GridState state;
  RunRecord record;
  bool failed = false;
  std::string diagnosis;
};

/// Integrates one method from the configured initial data (or from `start`)
/// to T. Fixed-step unless the method carries (EC); `tol` > 0 sets
/// tau_abs = tau_rel. Soliton runs fill summary.final_error against the exact
/// solution at the recorded final time. Numerical failures are caught and
/// reported through `failed` and `diagnosis`.
RunOutcome run_method(const ExperimentConfig& cfg, const MethodSpec& method, double dt, double tol,
                      double T, const StepObserver& observer = {}, const GridState* start = nullptr);

/// Fine-mesh AK4 solution of the configured problem, kept at a list of
/// times and advanced to nearby times on request.
class ReferenceTrack {
 public:
  ReferenceTrack(const ExperimentConfig& cfg, std::vector<double> times);

  const Grid& grid() const { return *grid_; }
  /// Reference restricted to `coarse` at time t.
  ComplexVector at(double t, const Grid& coarse) const;

 private:
  Problem problem_;
  GridPtr grid_;
  double dt_;
  std::optional<spectral::SpectralOperator> op_;
  std::vector<GridState> snapshots_;
};

/// Max-norm error of `state` against the configured exact solution (soliton)
/// or the reference track (semiclassical) at the state's time.
double solution_error(const ExperimentConfig& cfg, const GridState& state,
                      const ReferenceTrack* reference = nullptr);

ScenarioResult run_convergence(const ExperimentConfig& cfg);
ScenarioResult run_invariant_table(const ExperimentConfig& cfg);
ScenarioResult run_error_growth(const ExperimentConfig& cfg);
ScenarioResult run_work_precision(const ExperimentConfig& cfg);
ScenarioResult run_semiclassical(const ExperimentConfig& cfg);

/// Dispatches on cfg.scenario.
ScenarioResult run_scenario(const ExperimentConfig& cfg);

}  // namespace nls::harness
