#include "nls/core.hpp"

#include <algorithm>
#include <cmath>

#include "nls/errors.hpp"

namespace nls {

std::string to_string(Boundary bc) {
  return bc == Boundary::periodic ? "periodic" : "natural";
}

std::string to_string(InvariantKind kind) {
  return kind == InvariantKind::mass ? "mass" : "energy";
}

Grid make_grid(double x_left, double x_right, std::size_t m, Boundary bc) {
  if (m < 4) throw ConfigError("make_grid: need at least 4 points, got " + std::to_string(m));
  if (!(x_left < x_right) || !std::isfinite(x_left) || !std::isfinite(x_right))
    throw ConfigError("make_grid: degenerate domain");

  Grid g;
  g.x_left = x_left;
  g.x_right = x_right;
  g.m = m;
  g.bc = bc;
  const double length = x_right - x_left;
  g.dx = bc == Boundary::periodic ? length / static_cast<double>(m)
                                  : length / static_cast<double>(m - 1);
  g.nodes.resize(m);
  for (std::size_t j = 0; j < m; ++j) g.nodes[j] = x_left + static_cast<double>(j) * g.dx;
  return g;
}

GridPtr make_grid_ptr(double x_left, double x_right, std::size_t m, Boundary bc) {
  return std::make_shared<const Grid>(make_grid(x_left, x_right, m, bc));
}

bool all_finite(std::span<const Complex> u) {
  return std::all_of(u.begin(), u.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

void validate(const GridState& s) {
  if (!s.grid) throw ConfigError("state has no grid");
  if (s.u.size() != s.grid->m)
    throw DimensionError("state length " + std::to_string(s.u.size()) + " != grid size " +
                         std::to_string(s.grid->m));
  if (!all_finite(s.u)) throw NumericalFailure("state contains non-finite values");
}

RealVector to_interleaved(std::span<const Complex> u) {
  auto view = interleaved(u);
  return RealVector(view.begin(), view.end());
}

ComplexVector from_interleaved(std::span<const double> v) {
  if (v.size() % 2 != 0) throw DimensionError("interleaved vector has odd length");
  ComplexVector u(v.size() / 2);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = {v[2 * j], v[2 * j + 1]};
  return u;
}

Problem soliton_problem(int n) {
  if (n < 1 || n > 3) throw ConfigError("soliton count must be 1, 2 or 3");
  Problem p;
  p.x_left = -35.0;
  p.x_right = 35.0;
  p.a = 1.0;
  p.b = 2.0 * n * n;
  p.ic = SolitonData{n};
  p.bc = Boundary::periodic;
  return p;
}

Problem semiclassical_problem(double eps, Phase phase) {
  if (!(eps > 0.0)) throw ConfigError("semiclassical eps must be positive");
  Problem p;
  p.x_left = -8.0;
  p.x_right = 8.0;
  p.a = 0.5 * eps;
  p.b = 1.0 / eps;
  p.ic = SemiclassicalData{phase, eps};
  p.bc = Boundary::periodic;
  return p;
}

double discrete_mass(std::span<const Complex> u, const Grid& grid) {
  if (u.size() != grid.m) throw DimensionError("discrete_mass: length mismatch");
  CompensatedSum sum;
  for (const auto& z : u) sum += std::norm(z);
  return grid.dx * sum.value();
}

double discrete_mass(const GridState& s) {
  validate(s);
  return discrete_mass(s.u, *s.grid);
}

double discrete_energy(std::span<const Complex> u, const Grid& grid, double beta) {
  if (u.size() != grid.m) throw DimensionError("discrete_energy: length mismatch");
  const std::size_t m = u.size();
  const double inv_dx = 1.0 / grid.dx;
  CompensatedSum kinetic;
  CompensatedSum quartic;
  for (std::size_t j = 0; j < m; ++j) {
    const double a2 = std::norm(u[j]);
    quartic += a2 * a2;
    if (j + 1 < m) {
      kinetic += std::norm((u[j + 1] - u[j]) * inv_dx);
    } else if (grid.bc == Boundary::periodic) {
      kinetic += std::norm((u[0] - u[j]) * inv_dx);
    }
  }
  return grid.dx * (kinetic.value() - 0.5 * beta * quartic.value());
}

double discrete_energy(const GridState& s, double beta) {
  validate(s);
  return discrete_energy(s.u, *s.grid, beta);
}

InvariantFunctional::InvariantFunctional(InvariantKind kind, Evaluate evaluate, Gradient gradient)
    : kind_(kind), evaluate_(std::move(evaluate)), gradient_(std::move(gradient)) {}

void InvariantFunctional::gradient(std::span<const Complex> u, std::span<double> out) const {
  if (out.size() != 2 * u.size()) throw DimensionError("gradient: output must have length 2m");
  gradient_(u, out);
}

RealVector InvariantFunctional::gradient(const GridState& s) const {
  RealVector g(2 * s.u.size());
  gradient(s.u, g);
  return g;
}

InvariantFunctional mass_functional(const Grid& grid) {
  const Grid g = grid;
  const double dx = grid.dx;
  return InvariantFunctional(
      InvariantKind::mass, [g](std::span<const Complex> u) { return discrete_mass(u, g); },
      [dx](std::span<const Complex> u, std::span<double> out) {
        for (std::size_t j = 0; j < u.size(); ++j) {
          out[2 * j] = 2.0 * dx * u[j].real();
          out[2 * j + 1] = 2.0 * dx * u[j].imag();
        }
      });
}

InvariantFunctional energy_functional(const Grid& grid, double beta) {
  const Grid g = grid;
  return InvariantFunctional(
      InvariantKind::energy,
      [g, beta](std::span<const Complex> u) { return discrete_energy(u, g, beta); },
      [g, beta](std::span<const Complex> u, std::span<double> out) {
        const std::size_t m = u.size();
        const bool periodic = g.bc == Boundary::periodic;
        const double c = 2.0 / g.dx;
        for (std::size_t j = 0; j < m; ++j) {
          Complex lap{0.0, 0.0};
          if (j > 0) {
            lap += u[j] - u[j - 1];
          } else if (periodic) {
            lap += u[j] - u[m - 1];
          }
          if (j + 1 < m) {
            lap += u[j] - u[j + 1];
          } else if (periodic) {
            lap += u[j] - u[0];
          }
          const Complex grad = c * lap - 2.0 * beta * g.dx * std::norm(u[j]) * u[j];
          out[2 * j] = grad.real();
          out[2 * j + 1] = grad.imag();
        }
      });
}

double real_dot(std::span<const Complex> x, std::span<const Complex> y) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    s += x[j].real() * y[j].real() + x[j].imag() * y[j].imag();
  return s;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * y[j];
  return s;
}

double max_abs_diff(std::span<const Complex> x, std::span<const Complex> y) {
  if (x.size() != y.size()) throw DimensionError("max_abs_diff: length mismatch");
  double e = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) e = std::max(e, std::abs(x[j] - y[j]));
  return e;
}

double max_abs(std::span<const Complex> x) {
  double e = 0.0;
  for (const auto& z : x) e = std::max(e, std::abs(z));
  return e;
}

}  // namespace nls
