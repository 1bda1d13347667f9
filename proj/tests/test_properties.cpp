#include "doctest.h"

#include <random>

#include "nls/core.hpp"
#include "nls/relaxation.hpp"
#include "nls/splitting.hpp"
#include "properties.hpp"
#include "support.hpp"

using namespace nls;
namespace prop = testing::properties;
using testing::Complex;

TEST_SUITE("properties") {

TEST_CASE("DFT round trip at every experiment size") {
  for (std::size_t m : prop::kExperimentSizes)
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      CAPTURE(m);
      CHECK(prop::dft_round_trip(m, seed) <= 1e-13);
    }
}

TEST_CASE("nonlinear flow keeps the modulus") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(prop::nonlinear_flow_modulus(seed) <= 1e-15);
}

TEST_CASE("FEM S is exactly skew-symmetric") {
  for (std::size_t m : {4u, 5u, 16u, 33u, 64u}) CHECK(prop::fem_skew_defect(m) == 0.0);
}

TEST_CASE("tableau order conditions") {
  CHECK(prop::order_residual("ImEx3") <= 1e-12);
  CHECK(prop::order_residual("ImEx4") <= 1e-12);
}

TEST_CASE("invariant gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) CHECK(prop::gradient_vs_fd(seed) <= 1e-6);
}

TEST_CASE("solitons solve the equation at random points") {
  for (int n : {1, 2, 3})
    for (std::uint64_t seed : {7u, 8u}) {
      CAPTURE(n);
      CHECK(prop::soliton_pde_residual(n, seed) <= 1e-5);
    }
}

TEST_CASE("solitons start as sech") {
  for (int n : {1, 2, 3}) CHECK(prop::soliton_sech_defect(n) <= 1e-13);
}

TEST_CASE("discrete mass is homogeneous of degree 2") {
  std::mt19937_64 rng(81);
  const Grid g = make_grid(-35.0, 35.0, 1120, Boundary::periodic);
  for (int i = 0; i < 10; ++i) {
    const ComplexVector u = testing::random_state(g.m, rng);
    const Complex c(std::uniform_real_distribution<double>(-3, 3)(rng), std::uniform_real_distribution<double>(-3, 3)(rng));
    ComplexVector cu(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) cu[j] = c * u[j];
    const double lhs = discrete_mass(cu, g), rhs = std::norm(c) * discrete_mass(u, g);
    CHECK(std::abs(lhs - rhs) <= 1e-13 * rhs);
  }
}

TEST_CASE("splitting steps preserve mass for random data") {
  std::mt19937_64 rng(82);
  auto g = make_grid_ptr(-8.0, 8.0, 256, Boundary::periodic);
  const spectral::SpectralOperator op(g, 0.1);
  for (const char* name : {"S2", "AK4"})
    for (int i = 0; i < 5; ++i) {
      const GridState s{g, testing::smooth_random_state(*g, rng), 0.0};
      const GridState out = splitting::splitting_step(s, splitting::scheme(name), op, 5.0, 0.01);
      CHECK(std::abs(discrete_mass(out) - discrete_mass(s)) <= 1e-13 * discrete_mass(s));
    }
}

TEST_CASE("converged relaxation reproduces the invariants") {
  std::mt19937_64 rng(83);
  auto g = make_grid_ptr(-35.0, 35.0, 560, Boundary::periodic);
  const fem::FemOperator op = fem::assemble(*g, 8.0);
  imexrk::FemImplicit fim(op);
  imexrk::FemExplicit fex(op);
  const InvariantFunctional eta1 = fem::mass_functional(op), eta2 = fem::energy_functional(op);
  for (const char* name : {"ImEx3", "ImEx4"})
    for (double dt : {0.02, 0.005}) {
      const ComplexVector u = oracles::soliton_on_grid(2, *g, std::uniform_real_distribution<double>(0, 2)(rng));
      const imexrk::StepIncrements inc = imexrk::imex_step(u, imexrk::tableau(name), dt, fim, fex);
      const relaxation::RelaxationOutcome out = relaxation::relax_multi(u, inc, dt, eta1, eta2);
      REQUIRE(out.converged);
      const ComplexVector next = relaxation::relaxed_update(inc.u_next, inc, dt, out);
      CHECK(std::abs(eta1(next) - eta1(u)) < 1e-12);
      CHECK(std::abs(eta2(next) - eta2(u)) < 1e-12);
    }
}

}  // TEST_SUITE
