#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "nls/core.hpp"
#include "nls/errors.hpp"
#include "nls/imexrk.hpp"
#include "nls/relaxation.hpp"
#include "nls/run_record.hpp"

namespace nls {

enum class RelaxationMode { none, single, multi };

/// Tableau plus the implicit/explicit right-hand sides of one discretization.
struct ImExStepper {
  const imexrk::ImExTableau& tableau;
  imexrk::ImplicitPart& fim;
  imexrk::ExplicitPart& fex;
};

/// Which invariants relaxation enforces: `first` alone for single
/// relaxation, both for multiple relaxation.
struct Relaxer {
  RelaxationMode mode = RelaxationMode::none;
  std::optional<InvariantFunctional> first;
  std::optional<InvariantFunctional> second;

  static Relaxer none() { return {}; }
  static Relaxer single(InvariantFunctional eta) { return {RelaxationMode::single, std::move(eta), {}}; }
  static Relaxer multi(InvariantFunctional eta1, InvariantFunctional eta2) {
    return {RelaxationMode::multi, std::move(eta1), std::move(eta2)};
  }
};

struct IntegrationOptions {
  double dt = 0.01;  // fixed step, or the initial step when adaptive
  double T = 1.0;
  bool adaptive = false;
  relaxation::ControllerConfig controller{};
  /// Invariants whose drift from the initial value is tracked in the summary
  /// as mass and energy respectively.
  std::optional<InvariantFunctional> track_mass;
  std::optional<InvariantFunctional> track_energy;
  StepObserver observer;
};

/// Thrown when the step size falls under the floor or the state blows up;
/// carries the record up to that point.
class IntegrationAborted : public NumericalFailure {
 public:
  IntegrationAborted(const std::string& what, RunRecord record)
      : NumericalFailure(what), record_(std::move(record)) {}
  const RunRecord& record() const { return record_; }

 private:
  RunRecord record_;
};

/// Hybrid adaptive step control: reject on eps >= 1 with the controller's
/// step, reject on relaxation failure with half the step, otherwise accept
/// and advance by (1 + Gamma) dt. The last step's nominal size is shrunk to
/// land on T.
std::pair<GridState, RunRecord> adaptive_integrate(const GridState& s0, const ImExStepper& stepper,
                                                   const Relaxer& relaxer,
                                                   const relaxation::ControllerConfig& cfg, double T,
                                                   double dt0, const IntegrationOptions& extra = {});

/// Fixed nominal step; a relaxation failure retries the step with dt/2.
std::pair<GridState, RunRecord> fixed_integrate(const GridState& s0, const ImExStepper& stepper,
                                                const Relaxer& relaxer, double dt, double T,
                                                const IntegrationOptions& extra = {});

/// Dispatches on `opts.adaptive`.
std::pair<GridState, RunRecord> integrate(const GridState& s0, const ImExStepper& stepper,
                                          const Relaxer& relaxer, const IntegrationOptions& opts);

}  // namespace nls
