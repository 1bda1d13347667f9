#include "nls/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nls/errors.hpp"

namespace nls::relaxation {

void validate(const ControllerConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("controller: alpha must lie in (0, 1)");
  if (!(cfg.tau_abs >= 0.0 && cfg.tau_rel >= 0.0 && cfg.tau_abs + cfg.tau_rel > 0.0))
    throw ConfigError("controller: tolerances must be positive");
  if (!(cfg.conservation_tol > 0.0)) throw ConfigError("controller: conservation_tol must be positive");
  if (!(cfg.max_growth > 1.0)) throw ConfigError("controller: max_growth must exceed 1");
  if (cfg.q < 1) throw ConfigError("controller: q must be >= 1");
}

namespace {

void combine(std::span<const Complex> u_next, const imexrk::StepIncrements& inc, double dt,
             double g1, double g2, std::span<Complex> out) {
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = u_next[j] + dt * (g1 * inc.d1[j] + g2 * inc.d2[j]);
}

RelaxationOutcome single_quadratic(std::span<const Complex> un, const imexrk::StepIncrements& inc,
                                   double dt, const InvariantFunctional& eta, double target,
                                   double tol) {
  // eta(U^{n+1} + gamma dt d1) = eta(U^{n+1}) + gamma dt grad.d1 + gamma^2 dt^2 eta(d1).
  RealVector grad(2 * un.size());
  eta.gradient(inc.u_next, grad);
  const double qa = dt * dt * eta(inc.d1);
  const double qb = dt * dot(grad, interleaved(std::span<const Complex>(inc.d1)));
  const double qc = eta(inc.u_next) - target;

  RelaxationOutcome out;
  out.iterations = 1;
  double gamma = 0.0;
  if (qa == 0.0) {
    if (qb == 0.0) {
      gamma = qc == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    } else {
      gamma = -qc / qb;
    }
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) {
      gamma = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double sq = std::sqrt(disc);
      const double w = -0.5 * (qb + std::copysign(sq, qb));
      const double r1 = w / qa;
      const double r2 = w != 0.0 ? qc / w : r1;
      if (std::abs(r1) < std::abs(r2) || (std::abs(r1) == std::abs(r2) && r1 > r2)) {
        gamma = r1;
      } else {
        gamma = r2;
      }
    }
  }
  out.gamma1 = gamma;
  out.Gamma = gamma;
  if (!std::isfinite(gamma)) {
    out.residual = std::numeric_limits<double>::infinity();
    return out;
  }
  ComplexVector trial(un.size());
  combine(inc.u_next, inc, dt, gamma, 0.0, trial);
  out.residual = std::abs(eta(trial) - target);
  out.converged = out.residual < tol;
  return out;
}

RelaxationOutcome single_newton(std::span<const Complex> un, const imexrk::StepIncrements& inc,
                                double dt, const InvariantFunctional& eta, double target,
                                double tol) {
  const std::size_t m = un.size();
  ComplexVector trial(m);
  RealVector grad(2 * m);
  const auto d1 = interleaved(std::span<const Complex>(inc.d1));

  RelaxationOutcome out;
  double gamma = 0.0;
  combine(inc.u_next, inc, dt, gamma, 0.0, trial);
  double r = eta(trial) - target;
  int it = 0;
  int polish = 0;
  for (; it < 50 && r != 0.0; ++it) {
    if (std::abs(r) < tol && polish >= 2) break;
    eta.gradient(trial, grad);
    const double slope = dt * dot(grad, d1);
    if (slope == 0.0 || !std::isfinite(slope)) break;
    double step = -r / slope;
    double r_new = r;
    int halvings = 0;
    for (; halvings <= 10; ++halvings) {
      combine(inc.u_next, inc, dt, gamma + step, 0.0, trial);
      r_new = eta(trial) - target;
      if (std::abs(r_new) < std::abs(r)) break;
      step *= 0.5;
    }
    if (halvings > 10) break;
    gamma += step;
    r = r_new;
    if (std::abs(r) < tol) ++polish;
  }
  combine(inc.u_next, inc, dt, gamma, 0.0, trial);
  out.gamma1 = gamma;
  out.Gamma = gamma;
  out.residual = std::abs(r);
  out.iterations = it;
  out.converged = std::isfinite(gamma) && out.residual < tol;
  return out;
}

}  // namespace

RelaxationOutcome relax_single(std::span<const Complex> un, const imexrk::StepIncrements& inc,
                               double dt, const InvariantFunctional& eta, double tol,
                               std::optional<double> target) {
  if (inc.d1.size() != un.size() || inc.u_next.size() != un.size())
    throw DimensionError("relax_single: increment length mismatch");
  const double goal = target ? *target : eta(un);
  return eta.is_quadratic() ? single_quadratic(un, inc, dt, eta, goal, tol)
                            : single_newton(un, inc, dt, eta, goal, tol);
}

RelaxationOutcome relax_multi(std::span<const Complex> un, const imexrk::StepIncrements& inc,
                              double dt, const InvariantFunctional& eta1,
                              const InvariantFunctional& eta2, double tol, int max_iterations,
                              int max_halvings, std::optional<std::pair<double, double>> target) {
  const std::size_t m = un.size();
  if (inc.d1.size() != m || inc.d2.size() != m || inc.u_next.size() != m)
    throw DimensionError("relax_multi: increment length mismatch");
  const double target1 = target ? target->first : eta1(un);
  const double target2 = target ? target->second : eta2(un);
  const auto d1 = interleaved(std::span<const Complex>(inc.d1));
  const auto d2 = interleaved(std::span<const Complex>(inc.d2));

  ComplexVector trial(m);
  RealVector grad(2 * m);
  auto residual_at = [&](double g1, double g2, double& r1, double& r2) {
    combine(inc.u_next, inc, dt, g1, g2, trial);
    r1 = eta1(trial) - target1;
    r2 = eta2(trial) - target2;
    return std::hypot(r1, r2);
  };

  double g1 = 0.0;
  double g2 = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double norm = residual_at(g1, g2, r1, r2);

  RelaxationOutcome out;
  int it = 0;
  int polish = 0;
  while (it < max_iterations && std::isfinite(norm) && norm > 0.0) {
    // Past the tolerance a couple of extra iterations take the residual
    // down to rounding level.
    if (norm < tol && polish >= 2) break;
    // Jacobian at the current trial state; `trial` holds U_gamma here.
    combine(inc.u_next, inc, dt, g1, g2, trial);
    eta1.gradient(trial, grad);
    const double j11 = dt * dot(grad, d1);
    const double j12 = dt * dot(grad, d2);
    eta2.gradient(trial, grad);
    const double j21 = dt * dot(grad, d1);
    const double j22 = dt * dot(grad, d2);
    const double det = j11 * j22 - j12 * j21;
    const double scale = std::max({std::abs(j11 * j22), std::abs(j12 * j21), 1e-300});
    if (!std::isfinite(det) || std::abs(det) <= 1e-14 * scale) break;

    double s1 = -(j22 * r1 - j12 * r2) / det;
    double s2 = -(-j21 * r1 + j11 * r2) / det;
    double n1 = 0.0;
    double n2 = 0.0;
    double new_norm = norm;
    int h = 0;
    for (; h <= max_halvings; ++h) {
      new_norm = residual_at(g1 + s1, g2 + s2, n1, n2);
      if (new_norm < norm) break;
      s1 *= 0.5;
      s2 *= 0.5;
    }
    ++it;
    if (h > max_halvings) break;
    g1 += s1;
    g2 += s2;
    r1 = n1;
    r2 = n2;
    norm = new_norm;
    if (norm < tol) ++polish;
  }

  out.gamma1 = g1;
  out.gamma2 = g2;
  out.Gamma = g1 + g2;
  out.residual = norm;
  out.iterations = it;
  out.converged = std::isfinite(norm) && norm < tol;
  return out;
}

ComplexVector relaxed_update(std::span<const Complex> u_next, const imexrk::StepIncrements& inc,
                             double dt, const RelaxationOutcome& out) {
  if (!out.converged) throw std::logic_error("relaxed_update: relaxation did not converge");
  ComplexVector u(u_next.size());
  combine(u_next, inc, dt, out.gamma1, out.gamma2, u);
  return u;
}

GridState relaxed_update(const GridState& un, const imexrk::StepIncrements& inc, double dt,
                         const RelaxationOutcome& out) {
  GridState s{un.grid, relaxed_update(inc.u_next, inc, dt, out), un.t + (1.0 + out.Gamma) * dt};
  return s;
}

double error_estimate(std::span<const Complex> u_next, std::span<const Complex> u_hat,
                      const ControllerConfig& cfg) {
  if (u_next.size() != u_hat.size()) throw DimensionError("error_estimate: length mismatch");
  if (u_next.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < u_next.size(); ++i) {
    const double w =
        cfg.tau_abs + cfg.tau_rel * std::max(std::abs(u_next[i]), std::abs(u_hat[i]));
    const double e = std::abs(u_next[i] - u_hat[i]) / w;
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(u_next.size()));
}

double propose_step(double eps, double dt, const ControllerConfig& cfg) {
  const double cap = cfg.max_growth * dt;
  if (eps <= 0.0) return cap;
  const double proposal = cfg.alpha * std::pow(1.0 / eps, 1.0 / (cfg.q + 1)) * dt;
  return std::min(proposal, cap);
}

}  // namespace nls::relaxation
