#pragma once

#include <optional>
#include <span>
#include <utility>

#include "nls/core.hpp"
#include "nls/imexrk.hpp"

namespace nls::relaxation {

struct RelaxationOutcome {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double Gamma = 0.0;     // gamma1 + gamma2
  double residual = 0.0;  // ||G(U_gamma) - G(U^n)||_2
  int iterations = 0;
  bool converged = false;
};

struct ControllerConfig {
  double tau_abs = 1e-4;
  double tau_rel = 1e-4;
  double alpha = 0.9;
  int q = 3;  // exponent in (1/eps)^{1/(q+1)}: the embedded order
  double conservation_tol = 1e-12;
  double max_growth = 5.0;
  double dt_min = 0.0;  // 0 selects 1e-12 * T
};

/// Throws ConfigError unless 0 < alpha < 1 and the tolerances are positive.
void validate(const ControllerConfig& cfg);

/// Solves eta(U^{n+1} + dt gamma d1) = eta(U^n) for gamma. Quadratic
/// invariants use the closed form (smallest-magnitude root, ties to the
/// positive one); others a safeguarded scalar Newton from 0. `target`
/// replaces eta(U^n) when given (the integrator passes the initial value).
RelaxationOutcome relax_single(std::span<const Complex> un, const imexrk::StepIncrements& inc,
                               double dt, const InvariantFunctional& eta, double tol = 1e-12,
                               std::optional<double> target = {});

/// Solves G(U^{n+1} + dt (gamma1 d1 + gamma2 d2)) = G(U^n), G = (eta1, eta2),
/// by damped Newton from (0, 0).
RelaxationOutcome relax_multi(std::span<const Complex> un, const imexrk::StepIncrements& inc,
                              double dt, const InvariantFunctional& eta1,
                              const InvariantFunctional& eta2, double tol = 1e-12,
                              int max_iterations = 50, int max_halvings = 10,
                              std::optional<std::pair<double, double>> target = {});

/// U^{n+1} + dt (gamma1 d1 + gamma2 d2). Throws std::logic_error when the
/// outcome did not converge.
ComplexVector relaxed_update(std::span<const Complex> u_next, const imexrk::StepIncrements& inc,
                             double dt, const RelaxationOutcome& out);
/// State form: `un` is the state at t_n; the result sits at t_n + (1 + Gamma) dt.
GridState relaxed_update(const GridState& un, const imexrk::StepIncrements& inc, double dt,
                         const RelaxationOutcome& out);

/// Weighted RMS of U - Uhat with weights tau_abs + tau_rel max(|U_i|, |Uhat_i|).
double error_estimate(std::span<const Complex> u_next, std::span<const Complex> u_hat,
                      const ControllerConfig& cfg);

/// alpha (1/eps)^{1/(q+1)} dt, capped at max_growth * dt.
double propose_step(double eps, double dt, const ControllerConfig& cfg);

}  // namespace nls::relaxation
