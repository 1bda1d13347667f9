#include "doctest.h"

#include <random>

#include "nls/core.hpp"
#include "nls/dft.hpp"
#include "nls/errors.hpp"
#include "support.hpp"

using namespace nls;
using testing::Complex;

TEST_SUITE("core") {

TEST_CASE("make_grid spacing and nodes") {
  const Grid g = make_grid(-35.0, 35.0, 1120, Boundary::periodic);
  CHECK(g.dx == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(g.nodes.size() == 1120);

  const Grid unit = make_grid(0.0, 1.0, 4, Boundary::periodic);
  CHECK(unit.nodes == RealVector{0.0, 0.25, 0.5, 0.75});

  const Grid semi = make_grid(-8.0, 8.0, 1024, Boundary::periodic);
  CHECK(semi.dx == 1.0 / 64.0);

  const Grid nat = make_grid(0.0, 1.0, 5, Boundary::natural);
  CHECK(nat.dx == 0.25);
  CHECK(nat.nodes.front() == 0.0);
  CHECK(nat.nodes.back() == 1.0);
}

TEST_CASE("grid nodes are uniform") {
  for (Boundary bc : {Boundary::periodic, Boundary::natural}) {
    const Grid g = make_grid(-35.0, 35.0, 2240, bc);
    for (std::size_t j = 0; j + 1 < g.m; ++j)
      REQUIRE(std::abs(g.nodes[j + 1] - g.nodes[j] - g.dx) <= 1e-14 * 70.0);
  }
}

TEST_CASE("make_grid rejects bad input") {
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 3, Boundary::periodic), ConfigError);
  CHECK_THROWS_AS(make_grid(1.0, 1.0, 8, Boundary::periodic), ConfigError);
  CHECK_THROWS_AS(make_grid(2.0, 1.0, 8, Boundary::natural), ConfigError);
}

TEST_CASE("validate catches length mismatch and non-finite entries") {
  auto g = make_grid_ptr(0.0, 1.0, 4, Boundary::periodic);
  CHECK_THROWS_AS(validate(GridState{g, ComplexVector(3), 0.0}), DimensionError);
  ComplexVector u(4, 1.0);
  u[2] = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(validate(GridState{g, u, 0.0}), NumericalFailure);
  CHECK_NOTHROW(validate(GridState{g, ComplexVector(4, 1.0), 0.0}));
}

TEST_CASE("interleaved conversion is lossless") {
  std::mt19937_64 rng(1);
  const ComplexVector u = testing::random_state(17, rng);
  const RealVector v = to_interleaved(u);
  REQUIRE(v.size() == 34);
  CHECK(v[2] == u[1].real());
  CHECK(v[3] == u[1].imag());
  CHECK(from_interleaved(v) == u);
}

TEST_CASE("dft matches direct summation") {
  std::mt19937_64 rng(2);
  for (std::size_t m : {4u, 15u, 32u, 64u}) {
    const ComplexVector u = testing::random_state(m, rng);
    const ComplexVector fast = dft_forward(u);
    const ComplexVector slow = testing::direct_dft(u);
    CHECK(max_abs_diff(fast, slow) <= 1e-12 * static_cast<double>(m));
  }
}

TEST_CASE("dft of a constant lives in mode 0") {
  const Complex c(0.3, -1.7);
  const ComplexVector u(64, c);
  const ComplexVector h = dft_forward(u);
  CHECK(std::abs(h[0] - 64.0 * c) <= 1e-12);
  for (std::size_t k = 1; k < h.size(); ++k) REQUIRE(std::abs(h[k]) <= 1e-14 * 64.0 * std::abs(c));
}

TEST_CASE("dft of a single mode has one nonzero entry") {
  const std::size_t m = 48;
  const Grid g = make_grid(0.0, 2.0 * testing::kPi, m, Boundary::periodic);
  ComplexVector u(m);
  for (std::size_t j = 0; j < m; ++j) u[j] = std::exp(Complex(0.0, 3.0 * g.nodes[j]));
  const ComplexVector h = dft_forward(u);
  const ComplexVector ref = testing::direct_dft(u);
  for (std::size_t k = 0; k < m; ++k) {
    if (k == 3) {
      CHECK(std::abs(h[k] - static_cast<double>(m)) <= 1e-12);
    } else {
      REQUIRE(std::abs(h[k]) <= 1e-12);
    }
    REQUIRE(std::abs(h[k] - ref[k]) <= 1e-11);
  }
}

TEST_CASE("dft round trip and linearity") {
  std::mt19937_64 rng(3);
  const ComplexVector u = testing::random_state(1120, rng);
  const ComplexVector v = testing::random_state(1120, rng);
  CHECK(max_abs_diff(dft_inverse(dft_forward(u)), u) <= 1e-13);

  const Complex a(0.7, 0.2), b(-1.1, 0.5);
  ComplexVector w(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) w[j] = a * u[j] + b * v[j];
  const ComplexVector fu = dft_forward(u), fv = dft_forward(v), fw = dft_forward(w);
  double dev = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) dev = std::max(dev, std::abs(fw[k] - a * fu[k] - b * fv[k]));
  CHECK(dev <= 1e-11);
}

TEST_CASE("dft length mismatch") {
  Dft d(16);
  ComplexVector in(16), out(15);
  CHECK_THROWS_AS(d.forward(in, out), DimensionError);
  CHECK_THROWS_AS(d.inverse(ComplexVector(8), in), DimensionError);
}

TEST_CASE("discrete_mass values") {
  auto g4 = make_grid_ptr(0.0, 2.0, 4, Boundary::periodic);
  CHECK(discrete_mass(GridState{g4, ComplexVector(4, 1.0), 0.0}) == 2.0);
  CHECK(discrete_mass(GridState{g4, ComplexVector(4, 0.0), 0.0}) == 0.0);

  auto g = make_grid_ptr(-35.0, 35.0, 1120, Boundary::periodic);
  ComplexVector u(g->m);
  for (std::size_t j = 0; j < g->m; ++j) u[j] = testing::sech(g->nodes[j]);
  CHECK(discrete_mass(GridState{g, u, 0.0}) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("discrete_energy values") {
  auto g = make_grid_ptr(-1.0, 3.0, 16, Boundary::periodic);
  const Complex c(0.6, 0.8);
  const double beta = 3.0;
  CHECK(discrete_energy(GridState{g, ComplexVector(16, c), 0.0}, beta) ==
        doctest::Approx(-0.5 * beta * std::pow(std::abs(c), 4) * 4.0).epsilon(1e-14));
  CHECK(discrete_energy(GridState{g, ComplexVector(16, 0.0), 0.0}, beta) == 0.0);

  auto gs = make_grid_ptr(-35.0, 35.0, 1120, Boundary::periodic);
  ComplexVector u(gs->m);
  for (std::size_t j = 0; j < gs->m; ++j) u[j] = testing::sech(gs->nodes[j]);
  CHECK(std::abs(discrete_energy(GridState{gs, u, 0.0}, 2.0) + 2.0 / 3.0) <= 1e-3);
}

TEST_CASE("discrete_energy difference term stops at the last node on natural grids") {
  auto g = make_grid_ptr(0.0, 3.0, 4, Boundary::natural);
  const ComplexVector u{1.0, 0.0, 0.0, 1.0};
  CHECK(discrete_energy(GridState{g, u, 0.0}, 0.0) == doctest::Approx(2.0));
  const ComplexVector w{1.0, 0.0, 0.0, 0.0};
  auto gp = make_grid_ptr(0.0, 4.0, 4, Boundary::periodic);
  CHECK(discrete_energy(GridState{g, w, 0.0}, 0.0) == doctest::Approx(1.0));
  CHECK(discrete_energy(GridState{gp, w, 0.0}, 0.0) == doctest::Approx(2.0));
}

TEST_CASE("invariant functionals evaluate the discrete invariants") {
  std::mt19937_64 rng(4);
  const Grid g = make_grid(-5.0, 5.0, 40, Boundary::periodic);
  const ComplexVector u = testing::smooth_random_state(g, rng);
  const InvariantFunctional mass = mass_functional(g);
  const InvariantFunctional energy = energy_functional(g, 2.5);
  CHECK(mass.kind() == InvariantKind::mass);
  CHECK(mass.is_quadratic());
  CHECK_FALSE(energy.is_quadratic());
  CHECK(mass(u) == doctest::Approx(discrete_mass(u, g)).epsilon(1e-15));
  CHECK(energy(u) == doctest::Approx(discrete_energy(u, g, 2.5)).epsilon(1e-15));
}

TEST_CASE("invariant gradients match finite differences") {
  std::mt19937_64 rng(5);
  for (Boundary bc : {Boundary::periodic, Boundary::natural}) {
    const Grid g = make_grid(-4.0, 4.0, 24, bc);
    for (int trial = 0; trial < 3; ++trial) {
      const ComplexVector u = testing::random_state(g.m, rng);
      for (const InvariantFunctional& f : {mass_functional(g), energy_functional(g, 1.7)}) {
        RealVector grad(2 * g.m);
        f.gradient(u, grad);
        const RealVector fd = testing::fd_gradient([&](std::span<const Complex> v) { return f(v); }, u, 1e-7);
        CHECK(testing::max_rel_diff(grad, fd) <= 1e-6);
      }
    }
  }
}

TEST_CASE("compensated sum recovers cancelled low-order bits") {
  CompensatedSum s;
  s += 1.0;
  s += 1e-17;
  s += -1.0;
  CHECK(s.value() == 1e-17);
}

TEST_CASE("real_dot and max_abs helpers") {
  const ComplexVector x{Complex(1, 2), Complex(3, -1)};
  const ComplexVector y{Complex(2, 0), Complex(1, 1)};
  CHECK(real_dot(x, y) == 2.0 + 3.0 - 1.0);
  CHECK(max_abs(x) == doctest::Approx(std::sqrt(10.0)));
  CHECK(max_abs_diff(x, y) == doctest::Approx(std::sqrt(8.0)));
}

}  // TEST_SUITE
