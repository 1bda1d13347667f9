#pragma once

#include <string>
#include <utility>

#include "nls/core.hpp"
#include "nls/run_record.hpp"
#include "nls/spectral.hpp"

namespace nls::splitting {

struct SplittingScheme {
  std::string name;
  int order = 0;
  RealVector a;  // linear-substep fractions
  RealVector b;  // nonlinear-substep fractions
};

/// "S2" or "AK4"; throws LookupError otherwise.
SplittingScheme scheme(const std::string& name);

/// U <- e^{a_1 dt f} e^{b_1 dt g} ... e^{a_s dt f} e^{b_s dt g} U, rightmost
/// factor first. Works in place on `u`.
void step(std::span<Complex> u, const SplittingScheme& sch, const spectral::SpectralOperator& op,
          double b_coef, double dt);

GridState splitting_step(const GridState& s, const SplittingScheme& sch,
                         const spectral::SpectralOperator& op, double b_coef, double dt);

/// Fixed-step march to T; the final step is shortened to land on T. The
/// record tracks discrete mass and energy (with beta = b_coef / a, i.e. the
/// energy divided by a) drifts.
std::pair<GridState, RunRecord> integrate_splitting(const GridState& s0, const SplittingScheme& sch,
                                                    const spectral::SpectralOperator& op,
                                                    double b_coef, double dt, double T,
                                                    const StepObserver& observer = {});

}  // namespace nls::splitting
