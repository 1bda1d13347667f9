#pragma once

#include <memory>
#include <span>

#include "nls/core.hpp"
#include "nls/dft.hpp"

namespace nls::spectral {

/// Signed wavenumbers 2*pi*k/L in DFT order; the Nyquist mode takes k = -m/2.
/// Throws UnsupportedBoundary for natural grids.
RealVector wavenumbers(const Grid& grid);

/// Fourier pseudospectral discretization of f(u) = i a u_xx. Immutable and
/// shareable; per-call scratch only.
class SpectralOperator {
 public:
  SpectralOperator(GridPtr grid, double a);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  double a() const { return a_; }
  const RealVector& xi() const { return xi_; }
  /// -i a xi_k^2.
  Complex symbol(std::size_t k) const { return {0.0, -a_ * xi_[k] * xi_[k]}; }
  const Dft& dft() const { return *dft_; }

  /// out = F^{-1}(symbol * F(u)).
  void apply(std::span<const Complex> u, std::span<Complex> out) const;
  /// Solves (I - mu f) g = rhs mode by mode.
  void stage_solve(std::span<const Complex> rhs, double mu, std::span<Complex> g) const;
  /// Stage solve that also returns f(g) from the same spectrum.
  void stage_solve_apply(std::span<const Complex> rhs, double mu, std::span<Complex> g,
                         std::span<Complex> fg) const;
  /// Exact flow of u' = f(u): multiply each mode by exp(dt * symbol).
  void linear_flow(std::span<const Complex> u, double dt, std::span<Complex> out) const;
  /// Per-mode factors exp(dt * symbol), for reuse across flows of equal dt.
  ComplexVector flow_multipliers(double dt) const;
  void linear_flow(std::span<const Complex> u, std::span<const Complex> multipliers,
                   std::span<Complex> out) const;

 private:
  void check(std::size_t n) const;

  GridPtr grid_;
  double a_;
  RealVector xi_;
  std::shared_ptr<const Dft> dft_;
};

/// Pointwise i b |u|^2 u.
void nonlinear_term(std::span<const Complex> u, double b, std::span<Complex> out);
/// Exact flow of u' = i b |u|^2 u: u_j exp(i b |u_j|^2 dt).
void nonlinear_flow(std::span<const Complex> u, double b, double dt, std::span<Complex> out);

ComplexVector dispersion_apply(const SpectralOperator& op, const GridState& s);
ComplexVector dispersion_stage_solve(const SpectralOperator& op, const GridState& rhs, double mu);
ComplexVector nonlinear_term(const GridState& s, double b);
GridState exact_linear_flow(const SpectralOperator& op, const GridState& s, double dt);
GridState exact_nonlinear_flow(const GridState& s, double b, double dt);

}  // namespace nls::spectral
