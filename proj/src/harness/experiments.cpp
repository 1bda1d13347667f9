#include "nls/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nls/errors.hpp"
#include "nls/fem.hpp"
#include "nls/harness/fit.hpp"
#include "nls/imexrk.hpp"
#include "nls/integrator.hpp"
#include "nls/oracles.hpp"
#include "nls/splitting.hpp"

namespace nls::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string short_number(double x) {
  std::ostringstream ss;
  ss.precision(6);
  ss << x;
  return ss.str();
}

std::string run_label(const MethodSpec& m, double dt, double tol) {
  std::string s = m.name() + " dt=" + short_number(dt);
  if (m.adaptive && tol > 0.0) s += " tol=" + short_number(tol);
  return s;
}

GridPtr grid_for(const ExperimentConfig& cfg, const Problem& p, const MethodSpec& m) {
  const Boundary bc = m.disc == Discretization::fem ? cfg.bc : Boundary::periodic;
  return make_grid_ptr(p.x_left, p.x_right, cfg.nodes(bc), bc);
}

GridState initial_for(const ExperimentConfig& cfg, const GridPtr& grid, RunRecord& record) {
  if (cfg.problem == "soliton") {
    std::string warning;
    auto [s, beta] = oracles::soliton_initial(cfg.n, grid, &warning);
    if (!warning.empty()) record.warnings.push_back(warning);
    return s;
  }
  return oracles::semiclassical_initial(cfg.phase, cfg.eps, grid);
}

void merge_into(RunRecord& total, const RunRecord& part) {
  for (const auto& row : part.steps) total.log(row);
  for (const auto& w : part.warnings) total.warnings.push_back(w);
  auto& s = total.summary;
  s.max_mass_drift = std::max(s.max_mass_drift, part.summary.max_mass_drift);
  s.max_energy_drift = std::max(s.max_energy_drift, part.summary.max_energy_drift);
  s.runtime_seconds += part.summary.runtime_seconds;
  s.final_time = part.summary.final_time;
  s.endpoint_offset = part.summary.endpoint_offset;
}

std::vector<Cell> diag_cell(const RunOutcome& r) {
  return {r.failed ? Cell(r.diagnosis) : Cell(std::string())};
}

double fixed_or_first(const std::vector<double>& v) { return v.empty() ? 0.0 : v.front(); }

}  // namespace

RunOutcome run_method(const ExperimentConfig& cfg, const MethodSpec& method, double dt, double tol,
                      double T, const StepObserver& observer, const GridState* start) {
  RunOutcome out;
  out.method = method;
  out.dt = dt;
  out.tol = method.adaptive ? tol : 0.0;
  out.label = run_label(method, dt, out.tol);

  const Problem problem = cfg.make_problem();
  GridPtr grid = start ? start->grid : grid_for(cfg, problem, method);
  GridState s0 = start ? *start : initial_for(cfg, grid, out.record);
  std::vector<std::string> setup_warnings = out.record.warnings;

  try {
    if (method.is_splitting()) {
      if (grid->bc != Boundary::periodic)
        throw UnsupportedBoundary("splitting methods need a periodic grid");
      const spectral::SpectralOperator op(grid, problem.a);
      auto [s, rec] = splitting::integrate_splitting(s0, splitting::scheme(method.base), op, problem.b,
                                                     dt, T, observer);
      out.state = std::move(s);
      out.record = std::move(rec);
    } else {
      const imexrk::ImExTableau tab = imexrk::tableau(method.base);
      std::optional<spectral::SpectralOperator> sp;
      std::optional<fem::FemOperator> fe;
      std::unique_ptr<imexrk::ImplicitPart> fim;
      std::unique_ptr<imexrk::ExplicitPart> fex;
      std::optional<InvariantFunctional> mass;
      std::optional<InvariantFunctional> energy;
      if (method.disc == Discretization::spectral) {
        if (grid->bc != Boundary::periodic)
          throw UnsupportedBoundary("the spectral discretization needs a periodic grid");
        sp.emplace(grid, problem.a);
        fim = std::make_unique<imexrk::SpectralImplicit>(*sp);
        fex = std::make_unique<imexrk::NonlinearExplicit>(problem.b);
        mass = mass_functional(*grid);
        energy = energy_functional(*grid, problem.b / problem.a);
      } else {
        fe.emplace(fem::assemble(*grid, problem.b, problem.a));
        fim = std::make_unique<imexrk::FemImplicit>(*fe);
        fex = std::make_unique<imexrk::FemExplicit>(*fe);
        mass = fem::mass_functional(*fe);
        energy = fem::energy_functional(*fe);
      }
      Relaxer relaxer;
      switch (method.relax) {
        case RelaxKind::plain: relaxer = Relaxer::none(); break;
        case RelaxKind::single: relaxer = Relaxer::single(*mass); break;
        case RelaxKind::multi: relaxer = Relaxer::multi(*mass, *energy); break;
      }
      IntegrationOptions opts;
      opts.dt = dt;
      opts.T = T;
      opts.adaptive = method.adaptive;
      opts.controller = cfg.controller;
      opts.controller.q = cfg.q.value_or(tab.q);
      if (method.adaptive && tol > 0.0) opts.controller.tau_abs = opts.controller.tau_rel = tol;
      opts.track_mass = mass;
      opts.track_energy = energy;
      opts.observer = observer;
      const ImExStepper stepper{tab, *fim, *fex};
      auto [s, rec] = integrate(s0, stepper, relaxer, opts);
      out.state = std::move(s);
      out.record = std::move(rec);
    }
  } catch (const IntegrationAborted& e) {
    out.failed = true;
    out.diagnosis = e.what();
    out.record = e.record();
    out.state = s0;
  } catch (const NumericalFailure& e) {
    out.failed = true;
    out.diagnosis = e.what();
    out.state = s0;
  }
  out.record.warnings.insert(out.record.warnings.begin(), setup_warnings.begin(), setup_warnings.end());
  if (out.failed) {
    out.record.summary.final_error = kNaN;
  } else if (cfg.problem == "soliton") {
    out.record.summary.final_error = solution_error(cfg, out.state);
  }
  return out;
}

ReferenceTrack::ReferenceTrack(const ExperimentConfig& cfg, std::vector<double> times)
    : problem_(cfg.make_problem()), dt_(cfg.reference_dt) {
  if (cfg.reference_refinement < 4)
    throw ConfigError("reference: the fine grid must be at least 4x finer than the runs");
  const std::size_t m = cfg.nodes() * cfg.reference_refinement;
  grid_ = make_grid_ptr(problem_.x_left, problem_.x_right, m, Boundary::periodic);
  op_.emplace(grid_, problem_.a);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  GridState s = oracles::initial_state(problem_, grid_);
  const auto scheme = splitting::scheme("AK4");
  for (double t : times) {
    if (t > s.t) s = splitting::integrate_splitting(s, scheme, *op_, problem_.b, dt_, t).first;
    snapshots_.push_back(s);
  }
  if (snapshots_.empty()) snapshots_.push_back(s);
}

ComplexVector ReferenceTrack::at(double t, const Grid& coarse) const {
  const GridState* best = &snapshots_.front();
  for (const auto& s : snapshots_)
    if (std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
  if (best->t == t) return oracles::restrict_to(*best, coarse);
  // Short hop with AK4 (forward or backward) to the requested time.
  const double gap = t - best->t;
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(gap) / dt_));
  const double h = gap / static_cast<double>(n);
  GridState s = *best;
  const auto scheme = splitting::scheme("AK4");
  for (std::size_t i = 0; i < n; ++i) splitting::step(s.u, scheme, *op_, problem_.b, h);
  s.t = t;
  return oracles::restrict_to(s, coarse);
}

double solution_error(const ExperimentConfig& cfg, const GridState& state, const ReferenceTrack* reference) {
  if (cfg.problem == "soliton") {
    double e = 0.0;
    for (std::size_t j = 0; j < state.u.size(); ++j)
      e = std::max(e, std::abs(state.u[j] - oracles::soliton_exact(cfg.n, state.grid->nodes[j], state.t)));
    return e;
  }
  if (!reference) throw ConfigError("solution_error: semiclassical errors need a reference track");
  return max_abs_diff(state.u, reference->at(state.t, *state.grid));
}

ScenarioResult run_convergence(const ExperimentConfig& cfg) {
  ScenarioResult res;
  res.scenario = Scenario::convergence;
  Table t{"convergence",
          {"method", "row", "dt", "error", "order", "final_time", "runtime", "diagnosis"},
          {}};
  for (const auto& m : cfg.methods) {
    if (m.adaptive) throw ConfigError("convergence: " + m.name() + " is adaptive; use fixed-step methods");
    std::vector<double> dts;
    std::vector<double> errs;
    for (double dt : cfg.dt) {
      RunOutcome r = run_method(cfg, m, dt, 0.0, cfg.T);
      const double err = r.record.summary.final_error;
      t.add({m.name(), std::string("run"), dt, err, std::monostate{}, r.state.t,
             r.record.summary.runtime_seconds, diag_cell(r)[0]});
      dts.push_back(dt);
      errs.push_back(err);
      res.runs.push_back({r.label, std::move(r.record)});
    }
    try {
      const double order = convergence_order(dts, errs, cfg.fit_points);
      t.add({m.name(), std::string("order"), std::monostate{}, std::monostate{}, order, std::monostate{},
             std::monostate{}, std::string()});
    } catch (const FitError& e) {
      t.add({m.name(), std::string("order"), std::monostate{}, std::monostate{}, kNaN, std::monostate{},
             std::monostate{}, std::string(e.what())});
    }
  }
  res.tables.push_back(std::move(t));
  return res;
}

ScenarioResult run_invariant_table(const ExperimentConfig& cfg) {
  ScenarioResult res;
  res.scenario = Scenario::invariant_table;
  Table t{"invariants",
          {"method", "eta1_drift", "eta2_drift", "runtime", "accepted", "eps_rejected",
           "conservation_rejected", "final_error", "diagnosis"},
          {}};
  const double dt = fixed_or_first(cfg.dt);
  const double tol = fixed_or_first(cfg.tol);
  for (const auto& m : cfg.methods) {
    RunOutcome r = run_method(cfg, m, dt, tol, cfg.T);
    const auto& s = r.record.summary;
    t.add({m.name(), s.max_mass_drift, s.max_energy_drift, s.runtime_seconds,
           static_cast<long long>(s.accepted), static_cast<long long>(s.eps_rejected),
           static_cast<long long>(s.conservation_rejected), s.final_error, diag_cell(r)[0]});
    res.runs.push_back({r.label, std::move(r.record)});
  }
  res.tables.push_back(std::move(t));
  return res;
}

ScenarioResult run_error_growth(const ExperimentConfig& cfg) {
  ScenarioResult res;
  res.scenario = Scenario::error_growth;
  Table t{"error_growth", {"method", "row", "t", "error", "exponent", "diagnosis"}, {}};
  const double dt = fixed_or_first(cfg.dt);
  const double tol = fixed_or_first(cfg.tol);
  for (const auto& m : cfg.methods) {
    std::vector<std::pair<double, double>> series;
    double next_sample = 0.0;
    const StepObserver observer = [&](double time, std::span<const Complex> u) {
      if (cfg.sample_interval > 0.0 && time < next_sample) return;
      // The grid is rebuilt inside run_method; recover node positions from the domain.
      const std::size_t m_nodes = u.size();
      const Boundary bc = m.disc == Discretization::fem ? cfg.bc : Boundary::periodic;
      const double x0 = cfg.x_left();
      const double dx = (cfg.x_right() - x0) / static_cast<double>(bc == Boundary::natural ? m_nodes - 1 : m_nodes);
      double e = 0.0;
      for (std::size_t j = 0; j < m_nodes; ++j)
        e = std::max(e, std::abs(u[j] - oracles::soliton_exact(cfg.n, x0 + static_cast<double>(j) * dx, time)));
      series.emplace_back(time, e);
      if (cfg.sample_interval > 0.0)
        while (next_sample <= time) next_sample += cfg.sample_interval;
    };
    RunOutcome r = run_method(cfg, m, dt, tol, cfg.T, observer);
    for (const auto& [time, e] : series)
      t.add({m.name(), std::string("sample"), time, e, std::monostate{}, std::string()});
    try {
      const double p = fit_growth_exponent(series, cfg.window_start, cfg.window_end);
      t.add({m.name(), std::string("fit"), std::monostate{}, std::monostate{}, p, diag_cell(r)[0]});
    } catch (const FitError& e) {
      const std::string why = r.failed ? r.diagnosis + "; " + e.what() : std::string(e.what());
      t.add({m.name(), std::string("fit"), std::monostate{}, std::monostate{}, kNaN, why});
    }
    res.runs.push_back({r.label, std::move(r.record)});
  }
  res.tables.push_back(std::move(t));
  return res;
}

ScenarioResult run_work_precision(const ExperimentConfig& cfg) {
  ScenarioResult res;
  res.scenario = Scenario::work_precision;
  Table t{"work_precision", {"method", "dt", "tol", "error", "runtime", "accepted", "diagnosis"}, {}};
  std::optional<ReferenceTrack> reference;
  if (cfg.problem != "soliton") reference.emplace(cfg, std::vector<double>{cfg.T});
  for (const auto& m : cfg.methods) {
    std::vector<std::pair<double, double>> points;  // (dt, tol)
    if (m.adaptive && !cfg.tol.empty()) {
      for (double tol : cfg.tol) points.emplace_back(cfg.dt.front(), tol);
    } else {
      for (double dt : cfg.dt) points.emplace_back(dt, 0.0);
    }
    for (const auto& [dt, tol] : points) {
      RunOutcome best;
      for (std::size_t k = 0; k < cfg.repeat; ++k) {
        RunOutcome r = run_method(cfg, m, dt, tol, cfg.T);
        if (k == 0 || r.record.summary.runtime_seconds < best.record.summary.runtime_seconds)
          best = std::move(r);
      }
      double err = best.record.summary.final_error;
      if (!best.failed && reference) {
        err = solution_error(cfg, best.state, &*reference);
        best.record.summary.final_error = err;
      }
      t.add({m.name(), dt, m.adaptive ? Cell(tol) : Cell(std::monostate{}), err,
             best.record.summary.runtime_seconds, static_cast<long long>(best.record.summary.accepted),
             diag_cell(best)[0]});
      res.runs.push_back({best.label, std::move(best.record)});
    }
  }
  res.tables.push_back(std::move(t));
  return res;
}

ScenarioResult run_semiclassical(const ExperimentConfig& cfg) {
  ScenarioResult res;
  res.scenario = Scenario::semiclassical;
  Table errors{"semiclassical",
               {"method", "t", "error", "final_time", "runtime", "accepted", "eps_rejected",
                "conservation_rejected", "diagnosis"},
               {}};
  Table density{"density", {"method", "t", "x", "rho"}, {}};

  std::vector<double> times = cfg.output_times;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const double min_dt = *std::min_element(cfg.dt.begin(), cfg.dt.end());
  if (cfg.reference_dt > min_dt / 4.0)
    throw ConfigError("semiclassical: reference_dt must be at least 4x finer than the runs");
  std::vector<double> ref_times = times;
  ref_times.push_back(cfg.T);
  const ReferenceTrack reference(cfg, ref_times);

  const Problem problem = cfg.make_problem();
  const auto coarse = make_grid_ptr(problem.x_left, problem.x_right, cfg.nodes(), Boundary::periodic);
  for (double time : times) {
    const ComplexVector ref = reference.at(time, *coarse);
    const RealVector rho = oracles::density(ref);
    for (std::size_t j = 0; j < rho.size(); ++j)
      density.add({std::string("reference"), time, coarse->nodes[j], rho[j]});
  }

  const double dt = fixed_or_first(cfg.dt);
  const double tol = fixed_or_first(cfg.tol);
  for (const auto& m : cfg.methods) {
    RunOutcome total;
    GridState state;
    bool have_state = false;
    bool failed = false;
    std::string diagnosis;
    for (double target : times) {
      RunOutcome seg;
      if (!have_state) {
        seg = run_method(cfg, m, dt, tol, target);
        total.label = seg.label;
        have_state = true;
      } else {
        seg = run_method(cfg, m, dt, tol, target, {}, &state);
      }
      merge_into(total.record, seg.record);
      state = seg.state;
      if (seg.failed) {
        failed = true;
        diagnosis = seg.diagnosis;
        break;
      }
      const double err = solution_error(cfg, state, &reference);
      const auto& s = total.record.summary;
      errors.add({m.name(), target, err, state.t, s.runtime_seconds, static_cast<long long>(s.accepted),
                  static_cast<long long>(s.eps_rejected), static_cast<long long>(s.conservation_rejected),
                  std::string()});
      const RealVector rho = oracles::density(state);
      for (std::size_t j = 0; j < rho.size(); ++j)
        density.add({m.name(), target, state.grid->nodes[j], rho[j]});
      total.record.summary.final_error = err;
    }
    if (failed) {
      errors.add({m.name(), kNaN, kNaN, state.t, total.record.summary.runtime_seconds,
                  static_cast<long long>(total.record.summary.accepted),
                  static_cast<long long>(total.record.summary.eps_rejected),
                  static_cast<long long>(total.record.summary.conservation_rejected), diagnosis});
    }
    res.runs.push_back({total.label, std::move(total.record)});
  }
  res.tables.push_back(std::move(errors));
  res.tables.push_back(std::move(density));
  return res;
}

ScenarioResult run_scenario(const ExperimentConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::convergence: return run_convergence(cfg);
    case Scenario::invariant_table: return run_invariant_table(cfg);
    case Scenario::error_growth: return run_error_growth(cfg);
    case Scenario::work_precision: return run_work_precision(cfg);
    case Scenario::semiclassical: return run_semiclassical(cfg);
  }
  throw ConfigError("unknown scenario");
}

}  // namespace nls::harness
