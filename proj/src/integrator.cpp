#include "nls/integrator.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace nls {

std::string to_string(Disposition d) {
  switch (d) {
    case Disposition::accepted: return "accepted";
    case Disposition::eps_rejected: return "eps-rejected";
    case Disposition::conservation_rejected: return "conservation-rejected";
  }
  return "unknown";
}

void RunRecord::log(const StepRow& row) {
  steps.push_back(row);
  switch (row.disposition) {
    case Disposition::accepted: ++summary.accepted; break;
    case Disposition::eps_rejected: ++summary.eps_rejected; break;
    case Disposition::conservation_rejected: ++summary.conservation_rejected; break;
  }
}

namespace {

std::pair<GridState, RunRecord> run(const GridState& s0, const ImExStepper& stepper,
                                    const Relaxer& relaxer, double dt0, double T, bool adaptive,
                                    const relaxation::ControllerConfig& cfg,
                                    const IntegrationOptions& opts) {
  validate(s0);
  relaxation::validate(cfg);
  if (!(dt0 > 0.0)) throw ConfigError("integrate: dt must be positive");
  if (T < s0.t) throw ConfigError("integrate: T precedes the initial time");
  if (relaxer.mode != RelaxationMode::none && !relaxer.first)
    throw ConfigError("integrate: relaxation requested without an invariant");
  if (relaxer.mode == RelaxationMode::multi && !relaxer.second)
    throw ConfigError("integrate: multiple relaxation needs two invariants");

  const double span_T = T - s0.t;
  const double dt_min = cfg.dt_min > 0.0 ? cfg.dt_min : 1e-12 * std::max(std::abs(T), span_T);
  const double landing_slack = 1e-12 * std::max(1.0, std::abs(T));

  RunRecord record;
  GridState s = s0;
  const double mass0 = opts.track_mass ? (*opts.track_mass)(s.u) : 0.0;
  const double energy0 = opts.track_energy ? (*opts.track_energy)(s.u) : 0.0;
  if (opts.observer) opts.observer(s.t, s.u);
  const double target1 = relaxer.first ? (*relaxer.first)(s.u) : 0.0;
  const double target2 = relaxer.second ? (*relaxer.second)(s.u) : 0.0;

  auto abort = [&](const std::string& why) {
    record.summary.final_time = s.t;
    throw IntegrationAborted(why, record);
  };

  const auto start = std::chrono::steady_clock::now();
  double dt = dt0;
  while (T - s.t > landing_slack) {
    double h = dt;
    bool last = false;
    if (s.t + h >= T - landing_slack) {
      h = T - s.t;
      last = true;
    }
    if (h < dt_min)
      abort("integrate: step size " + std::to_string(h) + " fell below the floor at t = " +
            std::to_string(s.t));

    StepRow row{s.t, h, 0.0, 0.0, 0.0, Disposition::accepted};
    imexrk::StepIncrements inc = imexrk::imex_step(s.u, stepper.tableau, h, stepper.fim, stepper.fex);
    if (!all_finite(inc.u_next)) {
      if (!adaptive) abort("integrate: non-finite state at step " + std::to_string(record.steps.size()));
      row.eps = std::numeric_limits<double>::infinity();
      row.disposition = Disposition::eps_rejected;
      record.log(row);
      dt = h / cfg.max_growth;
      continue;
    }

    double eps = 0.0;
    if (adaptive) {
      const ComplexVector u_hat = inc.u_hat(s.u, h);
      eps = relaxation::error_estimate(inc.u_next, u_hat, cfg);
      row.eps = eps;
      if (!(eps < 1.0)) {
        row.disposition = Disposition::eps_rejected;
        record.log(row);
        dt = std::isfinite(eps) ? relaxation::propose_step(eps, h, cfg) : h / cfg.max_growth;
        continue;
      }
    }

    relaxation::RelaxationOutcome outcome;
    outcome.converged = true;
    if (relaxer.mode == RelaxationMode::single) {
      outcome = relaxation::relax_single(s.u, inc, h, *relaxer.first, cfg.conservation_tol, target1);
    } else if (relaxer.mode == RelaxationMode::multi) {
      outcome = relaxation::relax_multi(s.u, inc, h, *relaxer.first, *relaxer.second,
                                        cfg.conservation_tol, 50, 10,
                                        std::pair{target1, target2});
    }
    row.Gamma = outcome.Gamma;
    row.residual = outcome.residual;
    if (!outcome.converged || !(outcome.residual < cfg.conservation_tol)) {
      row.disposition = Disposition::conservation_rejected;
      record.log(row);
      dt = h / 2.0;
      continue;
    }

    if (relaxer.mode == RelaxationMode::none) {
      s.u = std::move(inc.u_next);
    } else {
      s.u = relaxation::relaxed_update(inc.u_next, inc, h, outcome);
    }
    s.t += (1.0 + outcome.Gamma) * h;
    record.log(row);
    if (!all_finite(s.u)) abort("integrate: non-finite state after accepted step");

    if (opts.track_mass)
      record.summary.max_mass_drift =
          std::max(record.summary.max_mass_drift, std::abs((*opts.track_mass)(s.u) - mass0));
    if (opts.track_energy)
      record.summary.max_energy_drift =
          std::max(record.summary.max_energy_drift, std::abs((*opts.track_energy)(s.u) - energy0));
    if (opts.observer) opts.observer(s.t, s.u);

    dt = adaptive ? relaxation::propose_step(eps, h, cfg) : dt0;
    if (last) break;
  }
  record.summary.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  record.summary.final_time = s.t;
  record.summary.endpoint_offset = std::abs(s.t - T);
  return {std::move(s), std::move(record)};
}

}  // namespace

std::pair<GridState, RunRecord> adaptive_integrate(const GridState& s0, const ImExStepper& stepper,
                                                   const Relaxer& relaxer,
                                                   const relaxation::ControllerConfig& cfg, double T,
                                                   double dt0, const IntegrationOptions& extra) {
  return run(s0, stepper, relaxer, dt0, T, true, cfg, extra);
}

std::pair<GridState, RunRecord> fixed_integrate(const GridState& s0, const ImExStepper& stepper,
                                                const Relaxer& relaxer, double dt, double T,
                                                const IntegrationOptions& extra) {
  return run(s0, stepper, relaxer, dt, T, false, extra.controller, extra);
}

std::pair<GridState, RunRecord> integrate(const GridState& s0, const ImExStepper& stepper,
                                          const Relaxer& relaxer, const IntegrationOptions& opts) {
  return opts.adaptive ? adaptive_integrate(s0, stepper, relaxer, opts.controller, opts.T, opts.dt, opts)
                       : fixed_integrate(s0, stepper, relaxer, opts.dt, opts.T, opts);
}

}  // namespace nls
