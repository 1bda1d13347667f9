#pragma once

#include <span>
#include <string>
#include <utility>

#include "nls/core.hpp"

namespace nls::oracles {

/// Exact bound-state solutions of i u_t + u_xx + 2n^2 |u|^2 u = 0 with
/// u(x, 0) = sech x, n in {1, 2, 3}. Numerator and denominator are sums of
/// c e^{p x + i q t}; the largest exponent is factored out before dividing.
/// Returns 0 beyond |x| = 40.
Complex soliton_exact(int n, double x, double t);

/// Beyond this |x| the solitons are below 1e-16 and evaluate to zero.
inline constexpr double kSolitonCutoff = 40.0;

ComplexVector soliton_on_grid(int n, const Grid& grid, double t);

/// sech sampled on the grid and beta = 2 n^2. Appends a warning to
/// `warning` when the boundary value exceeds 1e-14.
std::pair<GridState, double> soliton_initial(int n, GridPtr grid, std::string* warning = nullptr);

/// e^{-x^2}, optionally times exp(i / (eps (e^x + e^{-x}))).
Complex semiclassical_value(Phase phase, double eps, double x);
GridState semiclassical_initial(Phase phase, double eps, GridPtr grid);

/// Initial state for any problem on the given grid.
GridState initial_state(const Problem& p, GridPtr grid);

/// Pointwise |u|^2.
RealVector density(std::span<const Complex> u);
RealVector density(const GridState& s);

struct ReferenceSpec {
  double dt = 1e-4;
  std::size_t m = 65536;  // periodic points on the problem domain
};

/// AK4 fixed-step solution on a fine periodic grid at time T.
GridState reference_solution(const Problem& p, const ReferenceSpec& spec, double T);

/// Restriction of a fine periodic field to a nested coarse grid
/// (fine m must be an integer multiple of coarse m). Throws ConfigError otherwise.
ComplexVector restrict_to(const GridState& fine, const Grid& coarse);

}  // namespace nls::oracles
