#include "doctest.h"

#include <random>

#include "nls/core.hpp"
#include "nls/errors.hpp"
#include "nls/fem.hpp"
#include "nls/imexrk.hpp"
#include "nls/integrator.hpp"
#include "nls/oracles.hpp"
#include "nls/relaxation.hpp"
#include "nls/spectral.hpp"
#include "support.hpp"

using namespace nls;
using namespace nls::relaxation;
using imexrk::StepIncrements;
using testing::Complex;

namespace {

/// dx * sum |u|^2 with dx = 1, on any length.
InvariantFunctional unit_mass() {
  return InvariantFunctional(
      InvariantKind::mass,
      [](std::span<const Complex> u) {
        double s = 0.0;
        for (const Complex z : u) s += std::norm(z);
        return s;
      },
      [](std::span<const Complex> u, std::span<double> out) {
        for (std::size_t j = 0; j < u.size(); ++j) {
          out[2 * j] = 2.0 * u[j].real();
          out[2 * j + 1] = 2.0 * u[j].imag();
        }
      });
}

StepIncrements increments(const ComplexVector& un, const ComplexVector& d1, const ComplexVector& d2, double dt) {
  StepIncrements inc{ComplexVector(un.size()), d1, d2};
  for (std::size_t j = 0; j < un.size(); ++j) inc.u_next[j] = un[j] + dt * d1[j];
  return inc;
}

struct SpectralSetup {
  GridPtr grid;
  Problem problem;
  spectral::SpectralOperator op;
  imexrk::SpectralImplicit fim;
  imexrk::NonlinearExplicit fex;

  explicit SpectralSetup(int n, std::size_t m = 1120)
      : grid(make_grid_ptr(-35.0, 35.0, m, Boundary::periodic)),
        problem(soliton_problem(n)),
        op(grid, problem.a),
        fim(op),
        fex(problem.b) {}
  GridState initial() const { return oracles::initial_state(problem, grid); }
};

}  // namespace

TEST_SUITE("relaxation") {

TEST_CASE("relax_single picks gamma = 0 when the invariant already holds") {
  const ComplexVector un{1.0};
  StepIncrements inc{ComplexVector{Complex(0.0, 1.0)}, ComplexVector{Complex(-1.0, 1.0)}, ComplexVector{0.0}};
  const RelaxationOutcome out = relax_single(un, inc, 1.0, unit_mass());
  CHECK(out.converged);
  CHECK(out.gamma1 == 0.0);
  CHECK(out.Gamma == 0.0);
}

TEST_CASE("relax_single closed form on the scalar toy") {
  // (2 + gamma)^2 = 1 has roots -1 and -3.
  const StepIncrements inc = increments({1.0}, {1.0}, {0.0}, 1.0);
  const RelaxationOutcome out = relax_single(ComplexVector{1.0}, inc, 1.0, unit_mass());
  CHECK(out.converged);
  CHECK(out.gamma1 == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(out.gamma2 == 0.0);
}

TEST_CASE("relax_single ties go to the positive root") {
  // |i gamma + 1|^2 ... use u_next = 0, d1 = 1: gamma^2 = 1.
  StepIncrements inc{ComplexVector{0.0}, ComplexVector{1.0}, ComplexVector{0.0}};
  const RelaxationOutcome out = relax_single(ComplexVector{1.0}, inc, 1.0, unit_mass());
  CHECK(out.converged);
  CHECK(out.gamma1 == 1.0);
}

TEST_CASE("relax_single without a real root does not converge") {
  StepIncrements inc{ComplexVector{2.0}, ComplexVector{Complex(0.0, 1.0)}, ComplexVector{0.0}};
  const RelaxationOutcome out = relax_single(ComplexVector{1.0}, inc, 1.0, unit_mass());
  CHECK_FALSE(out.converged);
}

TEST_CASE("relax_single honours an explicit target") {
  const StepIncrements inc = increments({1.0}, {1.0}, {0.0}, 1.0);
  const RelaxationOutcome out = relax_single(ComplexVector{1.0}, inc, 1.0, unit_mass(), 1e-12, 2.25);
  CHECK(out.converged);
  CHECK(out.gamma1 == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("relax_single Newton path on the energy") {
  SpectralSetup su(2);
  const GridState s0 = su.initial();
  const InvariantFunctional energy = energy_functional(*su.grid, su.problem.b);
  const StepIncrements inc = imexrk::imex_step(s0.u, imexrk::tableau("ImEx4"), 0.01, su.fim, su.fex);
  const RelaxationOutcome out = relax_single(s0.u, inc, 0.01, energy);
  REQUIRE(out.converged);
  const GridState next = relaxed_update(s0, inc, 0.01, out);
  CHECK(std::abs(energy.evaluate(next) - energy.evaluate(s0)) < 1e-12);
  CHECK(std::abs(out.gamma1) < 0.1);
}

TEST_CASE("relax_multi returns zero at a zero residual") {
  const ComplexVector un{1.0, Complex(0.0, 2.0)};
  StepIncrements inc{un, ComplexVector{1.0, 1.0}, ComplexVector{Complex(0, 1), 0.5}};
  const InvariantFunctional quartic(
      InvariantKind::energy,
      [](std::span<const Complex> u) {
        double s = 0.0;
        for (const Complex z : u) s += std::norm(z) * std::norm(z);
        return s;
      },
      [](std::span<const Complex> u, std::span<double> out) {
        for (std::size_t j = 0; j < u.size(); ++j) {
          out[2 * j] = 4.0 * std::norm(u[j]) * u[j].real();
          out[2 * j + 1] = 4.0 * std::norm(u[j]) * u[j].imag();
        }
      });
  const RelaxationOutcome out = relax_multi(un, inc, 0.1, unit_mass(), quartic);
  CHECK(out.converged);
  CHECK(out.iterations == 0);
  CHECK(out.gamma1 == 0.0);
  CHECK(out.gamma2 == 0.0);
}

TEST_CASE("relax_multi matches a grid-search oracle") {
  std::mt19937_64 rng(51);
  auto g = make_grid_ptr(-2.0, 2.0, 8, Boundary::periodic);
  const fem::FemOperator op = fem::assemble(*g, 2.0);
  const InvariantFunctional eta1 = fem::mass_functional(op);
  const InvariantFunctional eta2 = fem::energy_functional(op);

  const ComplexVector un = testing::smooth_random_state(*g, rng);
  const ComplexVector d1 = testing::smooth_random_state(*g, rng);
  const ComplexVector d2 = testing::smooth_random_state(*g, rng);
  const double dt = 1.0;
  const double true1 = 0.12, true2 = -0.08;
  StepIncrements inc{ComplexVector(8), d1, d2};
  for (std::size_t j = 0; j < 8; ++j) inc.u_next[j] = un[j] - dt * (true1 * d1[j] + true2 * d2[j]);

  auto residual = [&](double a, double b) {
    ComplexVector u(8);
    for (std::size_t j = 0; j < 8; ++j) u[j] = inc.u_next[j] + dt * (a * d1[j] + b * d2[j]);
    return std::array<double, 2>{eta1(u) - eta1(un), eta2(u) - eta2(un)};
  };
  // Brute-force search over [-0.5, 0.5]^2, then finite-difference Newton polish.
  double best_a = 0, best_b = 0, best = 1e300;
  for (int i = -50; i <= 50; ++i)
    for (int k = -50; k <= 50; ++k) {
      const auto r = residual(i * 0.01, k * 0.01);
      const double n = std::hypot(r[0], r[1]);
      if (n < best) best = n, best_a = i * 0.01, best_b = k * 0.01;
    }
  for (int it = 0; it < 30; ++it) {
    const double h = 1e-7;
    const auto r = residual(best_a, best_b);
    const auto ra = residual(best_a + h, best_b), rb = residual(best_a, best_b + h);
    const double j11 = (ra[0] - r[0]) / h, j21 = (ra[1] - r[1]) / h;
    const double j12 = (rb[0] - r[0]) / h, j22 = (rb[1] - r[1]) / h;
    const double det = j11 * j22 - j12 * j21;
    best_a -= (j22 * r[0] - j12 * r[1]) / det;
    best_b -= (-j21 * r[0] + j11 * r[1]) / det;
  }

  const RelaxationOutcome out = relax_multi(un, inc, dt, eta1, eta2);
  REQUIRE(out.converged);
  CHECK(std::abs(out.gamma1 - best_a) <= 1e-10);
  CHECK(std::abs(out.gamma2 - best_b) <= 1e-10);
  CHECK(out.Gamma == doctest::Approx(out.gamma1 + out.gamma2));
}

TEST_CASE("relax_multi fails on parallel gradients") {
  SpectralSetup su(2, 280);
  const GridState s0 = su.initial();
  const InvariantFunctional mass = mass_functional(*su.grid);
  const StepIncrements inc = imexrk::imex_step(s0.u, imexrk::tableau("ImEx3"), 0.02, su.fim, su.fex);
  const RelaxationOutcome out = relax_multi(s0.u, inc, 0.02, mass, mass);
  CHECK_FALSE(out.converged);
}

TEST_CASE("relaxed_update") {
  auto g = make_grid_ptr(0.0, 1.0, 4, Boundary::periodic);
  const GridState un{g, ComplexVector{1.0, 2.0, 3.0, 4.0}, 0.5};
  const ComplexVector d1{1.0, -1.0, Complex(0, 1), 0.0};
  const StepIncrements inc = increments(un.u, d1, ComplexVector(4, 0.0), 0.1);

  RelaxationOutcome zero;
  zero.converged = true;
  const GridState same = relaxed_update(un, inc, 0.1, zero);
  CHECK(same.u == inc.u_next);
  CHECK(same.t == doctest::Approx(0.6));

  RelaxationOutcome back;
  back.gamma1 = -1.0;
  back.Gamma = -1.0;
  back.converged = true;
  const GridState undone = relaxed_update(un, inc, 0.1, back);
  CHECK(max_abs_diff(undone.u, un.u) <= 1e-15);
  CHECK(undone.t == 0.5);

  RelaxationOutcome bad;
  CHECK_THROWS_AS(relaxed_update(un, inc, 0.1, bad), std::logic_error);
}

TEST_CASE("relaxed states reproduce the invariants") {
  SpectralSetup su(2);
  const GridState s0 = su.initial();
  auto g = su.grid;
  const fem::FemOperator op = fem::assemble(*g, su.problem.b);
  imexrk::FemImplicit fim(op);
  imexrk::FemExplicit fex(op);
  const InvariantFunctional eta1 = fem::mass_functional(op), eta2 = fem::energy_functional(op);
  const StepIncrements inc = imexrk::imex_step(s0.u, imexrk::tableau("ImEx4"), 0.005, fim, fex);
  const RelaxationOutcome out = relax_multi(s0.u, inc, 0.005, eta1, eta2);
  REQUIRE(out.converged);
  const GridState next = relaxed_update(s0, inc, 0.005, out);
  CHECK(std::abs(eta1.evaluate(next) - eta1.evaluate(s0)) < 1e-12);
  CHECK(std::abs(eta2.evaluate(next) - eta2.evaluate(s0)) < 1e-12);
}

TEST_CASE("error_estimate") {
  ControllerConfig cfg;
  const ComplexVector u{Complex(1, 2), 3.0};
  CHECK(error_estimate(u, u, cfg) == 0.0);

  const double e = error_estimate(ComplexVector{1.0 + 2e-4}, ComplexVector{1.0}, cfg);
  CHECK(e == doctest::Approx(2e-4 / (1e-4 + 1e-4 * (1 + 2e-4))).epsilon(1e-12));
  CHECK(e == doctest::Approx(0.9999).epsilon(1e-4));

  cfg.tau_abs = 0.0;
  const ComplexVector a{1.0, Complex(0.5, -0.2)}, b{1.01, Complex(0.49, -0.2)};
  ComplexVector a10(2), b10(2);
  for (int i = 0; i < 2; ++i) a10[i] = 10.0 * a[i], b10[i] = 10.0 * b[i];
  CHECK(error_estimate(a10, b10, cfg) == doctest::Approx(error_estimate(a, b, cfg)).epsilon(1e-14));

  CHECK_THROWS_AS(error_estimate(a, ComplexVector{1.0}, cfg), DimensionError);
}

TEST_CASE("propose_step") {
  ControllerConfig cfg;
  cfg.q = 3;
  CHECK(propose_step(1.0, 0.1, cfg) == doctest::Approx(0.09));
  CHECK(propose_step(1.0 / 16.0, 0.1, cfg) == doctest::Approx(0.18));
  CHECK(propose_step(0.0, 0.1, cfg) == doctest::Approx(0.5));
  CHECK(propose_step(1e-30, 0.1, cfg) == doctest::Approx(0.5));
}

TEST_CASE("controller validation") {
  ControllerConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = {};
  cfg.tau_abs = cfg.tau_rel = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = {};
  cfg.conservation_tol = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("smooth linear problem: no rejections, steps grow to the cap") {
  auto g = make_grid_ptr(0.0, 2.0 * testing::kPi, 16, Boundary::periodic);
  const spectral::SpectralOperator op(g, 1.0);
  imexrk::SpectralImplicit fim(op);
  imexrk::NonlinearExplicit fex(0.0);
  GridState s0{g, ComplexVector(16), 0.0};
  for (std::size_t j = 0; j < 16; ++j) s0.u[j] = std::exp(Complex(0.0, g->nodes[j]));
  const imexrk::ImExTableau t = imexrk::tableau("ImEx3");
  ControllerConfig cfg;
  cfg.q = t.q;
  cfg.tau_abs = cfg.tau_rel = 1e-3;
  const auto [s, rec] = adaptive_integrate(s0, {t, fim, fex}, Relaxer::none(), cfg, 0.1, 1e-5);
  CHECK(rec.summary.eps_rejected == 0);
  CHECK(rec.summary.conservation_rejected == 0);
  REQUIRE(rec.steps.size() >= 3);
  for (std::size_t i = 1; i + 1 < rec.steps.size(); ++i)
    CHECK(rec.steps[i].dt == doctest::Approx(cfg.max_growth * rec.steps[i - 1].dt));
  CHECK(s.t == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("forced relaxation failure halves the step and aborts at the floor") {
  SpectralSetup su(2, 280);
  const InvariantFunctional mass = mass_functional(*su.grid);
  const imexrk::ImExTableau t = imexrk::tableau("ImEx3");
  IntegrationOptions opts;
  opts.dt = 0.01;
  opts.T = 0.1;
  opts.controller.dt_min = 0.003;
  try {
    (void)integrate(su.initial(), {t, su.fim, su.fex}, Relaxer::multi(mass, mass), opts);
    FAIL("expected IntegrationAborted");
  } catch (const IntegrationAborted& e) {
    const RunRecord& rec = e.record();
    REQUIRE(rec.steps.size() == 2);
    CHECK(rec.summary.accepted == 0);
    CHECK(rec.summary.conservation_rejected == 2);
    CHECK(rec.steps[0].dt == 0.01);
    CHECK(rec.steps[1].dt == 0.005);
    CHECK(rec.summary.final_time == 0.0);
  }
}

TEST_CASE("fixed-step relaxation failure retries with half the step") {
  SpectralSetup su(2, 280);
  const InvariantFunctional mass = mass_functional(*su.grid);
  const imexrk::ImExTableau t = imexrk::tableau("ImEx3");
  IntegrationOptions opts;
  opts.dt = 0.01;
  opts.T = 0.01;
  const auto [s, rec] = integrate(su.initial(), {t, su.fim, su.fex}, Relaxer::multi(mass, mass), opts);
  REQUIRE(rec.steps.size() >= 2);
  CHECK(rec.steps[0].disposition == Disposition::conservation_rejected);
  for (std::size_t i = 0; i + 1 < rec.steps.size(); ++i)
    if (rec.steps[i].disposition == Disposition::conservation_rejected) {
      CHECK(rec.steps[i + 1].t == rec.steps[i].t);
      CHECK(rec.steps[i + 1].dt == rec.steps[i].dt / 2);
    }
  CHECK(rec.summary.accepted >= 1);
  CHECK(s.t == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("conservation holds on every accepted step of an adaptive MR run") {
  auto g = make_grid_ptr(-35.0, 35.0, 1120, Boundary::periodic);
  const Problem p = soliton_problem(2);
  const fem::FemOperator op = fem::assemble(*g, p.b);
  imexrk::FemImplicit fim(op);
  imexrk::FemExplicit fex(op);
  const InvariantFunctional eta1 = fem::mass_functional(op), eta2 = fem::energy_functional(op);
  const GridState s0 = oracles::initial_state(p, g);
  const double m0 = eta1.evaluate(s0), e0 = eta2.evaluate(s0);
  const imexrk::ImExTableau t = imexrk::tableau("ImEx4");

  IntegrationOptions opts;
  opts.dt = 0.05;
  opts.T = 1.0;
  opts.adaptive = true;
  opts.controller.q = t.q;
  opts.track_mass = eta1;
  opts.track_energy = eta2;
  double worst1 = 0.0, worst2 = 0.0;
  double last_t = -1.0;
  bool increasing = true;
  opts.observer = [&](double time, std::span<const Complex> u) {
    worst1 = std::max(worst1, std::abs(eta1(u) - m0));
    worst2 = std::max(worst2, std::abs(eta2(u) - e0));
    increasing = increasing && time > last_t;
    last_t = time;
  };
  const auto [s, rec] = integrate(s0, {t, fim, fex}, Relaxer::multi(eta1, eta2), opts);
  CHECK(increasing);
  CHECK(worst1 < opts.controller.conservation_tol);
  CHECK(worst2 < opts.controller.conservation_tol);
  CHECK(rec.summary.max_mass_drift <= 5e-14);
  CHECK(rec.summary.max_energy_drift <= 5e-14);

  // Branch order: conservation rejections only follow an accepted error estimate.
  for (const StepRow& row : rec.steps)
    if (row.disposition == Disposition::conservation_rejected) CHECK(row.eps < 1.0);

  // Landing: within one nominal step's |Gamma| dt of T.
  const StepRow& lastrow = rec.steps.back();
  CHECK(rec.summary.endpoint_offset <= std::abs(lastrow.Gamma) * lastrow.dt + 1e-12);
  CHECK(rec.summary.final_time == s.t);
}

TEST_CASE("relaxation magnitude shrinks with the step") {
  SpectralSetup su(2);
  const GridState s0 = su.initial();
  const InvariantFunctional mass = mass_functional(*su.grid);
  for (const char* name : {"ImEx3", "ImEx4"}) {
    const imexrk::ImExTableau t = imexrk::tableau(name);
    std::vector<double> h, gam;
    for (double dt : {8e-3, 4e-3, 2e-3, 1e-3}) {
      const StepIncrements inc = imexrk::imex_step(s0.u, t, dt, su.fim, su.fex);
      const RelaxationOutcome out = relax_single(s0.u, inc, dt, mass);
      REQUIRE(out.converged);
      h.push_back(std::log(dt));
      gam.push_back(std::log(std::abs(out.Gamma)));
    }
    CAPTURE(name);
    CHECK(testing::slope(h, gam) >= t.p - 1.3);
  }
}

TEST_CASE("fixed-step relaxed runs keep mass to rounding") {
  SpectralSetup su(2);
  const InvariantFunctional mass = mass_functional(*su.grid);
  const imexrk::ImExTableau t = imexrk::tableau("ImEx3");
  IntegrationOptions opts;
  opts.dt = 0.01;
  opts.T = 1.0;
  opts.track_mass = mass;
  const auto [s, rec] = integrate(su.initial(), {t, su.fim, su.fex}, Relaxer::single(mass), opts);
  CHECK(rec.summary.accepted >= 99);
  CHECK(rec.summary.accepted <= 101);
  CHECK(rec.summary.max_mass_drift <= 5e-15);
  CHECK(std::abs(s.t - 1.0) <= 1e-4);
}

TEST_CASE("integrate rejects inconsistent setups") {
  SpectralSetup su(1, 64);
  const imexrk::ImExTableau t = imexrk::tableau("ImEx3");
  IntegrationOptions opts;
  opts.dt = 0.0;
  CHECK_THROWS_AS(integrate(su.initial(), {t, su.fim, su.fex}, Relaxer::none(), opts), ConfigError);
  opts.dt = 0.1;
  opts.T = -1.0;
  CHECK_THROWS_AS(integrate(su.initial(), {t, su.fim, su.fex}, Relaxer::none(), opts), ConfigError);
  opts.T = 1.0;
  Relaxer broken;
  broken.mode = RelaxationMode::multi;
  broken.first = mass_functional(*su.grid);
  CHECK_THROWS_AS(integrate(su.initial(), {t, su.fim, su.fex}, broken, opts), ConfigError);
}

}  // TEST_SUITE
