#pragma once

#include <cstddef>
#include <span>
#include <utility>

#include "nls/core.hpp"

// Conservative linear finite-element semi-discretization
//
//   U' = -[ (a/dx^2) Itilde^{-1} S U + beta F(U) ],   F_j = |U_j|^2 A U_j,
//
// with U = [v_1, w_1, ..., v_m, w_m] (real and imaginary parts interleaved)
// and A = [[0, 1], [-1, 0]]. Every block of S is an integer multiple of A and
// every block of Itilde a multiple of the 2x2 identity, so both matrices are
// stored as one scalar per block.
//
// Two boundary variants exist. `natural` is the operator with half-weighted
// end nodes; its conserved pair weights the end nodes of the mass and of the
// quartic energy term by 1/2. `periodic` wraps the first and last rows,
// Itilde = I, and conserves the plain discrete mass and energy. The energy
// weights the difference term by the dispersion coefficient a.

namespace nls::fem {

class FemOperator {
 public:
  FemOperator(std::size_t m, double dx, Boundary bc, double beta, double a = 1.0);

  std::size_t m() const { return m_; }
  double dx() const { return dx_; }
  Boundary bc() const { return bc_; }
  double beta() const { return beta_; }
  double a() const { return a_; }

  /// Block scalar of Itilde at node j.
  double itilde(std::size_t j) const { return itilde_[j]; }
  /// Multiplier of A in block (j, j), (j, j-1) and (j, j+1) of S; the
  /// off-diagonal couplings wrap on the periodic variant.
  double s_diag(std::size_t j) const { return s_diag_[j]; }
  double s_off() const { return 1.0; }

  /// Dense 2m x 2m row-major S and the 2m diagonal of Itilde (test helpers).
  RealVector dense_S() const;
  RealVector itilde_diagonal() const;

  /// out = S U (interleaved).
  void apply_S(std::span<const double> u, std::span<double> out) const;
  /// f_Im(U) = -(a/dx^2) Itilde^{-1} S U.
  void apply_linear(std::span<const double> u, std::span<double> out) const;
  /// f_Ex(U) = -beta F(U).
  void apply_nonlinear(std::span<const double> u, std::span<double> out) const;

 private:
  std::size_t m_;
  double dx_;
  Boundary bc_;
  double beta_;
  double a_;
  RealVector itilde_;
  RealVector s_diag_;
};

FemOperator assemble(std::size_t m, double dx, Boundary bc, double beta, double a = 1.0);
FemOperator assemble(const Grid& grid, double beta, double a = 1.0);

/// Full right-hand side f_FEM (length 2m).
RealVector fem_rhs(const FemOperator& op, const GridState& s);
void fem_rhs(const FemOperator& op, std::span<const double> u, std::span<double> out);

/// Factored (Itilde + (mu a/dx^2) S). With the blocks read as complex scalars
/// (I -> 1, A -> -i) the matrix is complex tridiagonal, cyclic on the
/// periodic variant; it is factored once and reused across solves.
class StageFactorization {
 public:
  StageFactorization(const FemOperator& op, double mu);

  double mu() const { return mu_; }

  /// g with (Itilde + (mu/dx^2) S) g = Itilde rhs, i.e. (I - mu f_Im) g = rhs.
  void solve(std::span<const double> rhs, std::span<double> g) const;
  RealVector solve(std::span<const double> rhs) const;

 private:
  void solve_tridiagonal(std::span<Complex> x) const;

  double mu_;
  bool cyclic_;
  RealVector itilde_;
  ComplexVector lower_;   // sub-diagonal of the (possibly modified) tridiagonal
  ComplexVector upper_;   // super-diagonal
  ComplexVector c_prime_; // forward-sweep multipliers
  ComplexVector d_inv_;   // inverse pivots
  // Sherman-Morrison correction for the cyclic corners.
  Complex corner_top_{};     // M[0][m-1]
  Complex corner_bottom_{};  // M[m-1][0]
  Complex shift_{};
  ComplexVector z_;
};

StageFactorization stage_factorize(const FemOperator& op, double mu);
RealVector stage_solve(const StageFactorization& fac, std::span<const double> rhs);

/// Gradients of the conserved pair for this operator, interleaved.
/// Periodic: 2 dx [v_1, w_1, ...] and the wrapped second difference
/// (2a/dx)(-U_{j-1} + 2 U_j - U_{j+1}) - 2 beta dx |U_j|^2 U_j.
RealVector grad_mass(const FemOperator& op, const GridState& s);
RealVector grad_energy(const FemOperator& op, const GridState& s);
void grad_mass(const FemOperator& op, std::span<const double> u, std::span<double> out);
void grad_energy(const FemOperator& op, std::span<const double> u, std::span<double> out);

/// The conserved invariants matching `op` (with their gradients).
double fem_mass(const FemOperator& op, std::span<const Complex> u);
double fem_energy(const FemOperator& op, std::span<const Complex> u);
InvariantFunctional mass_functional(const FemOperator& op);
InvariantFunctional energy_functional(const FemOperator& op);

/// (grad eta_1 . f_FEM, grad eta_2 . f_FEM).
std::pair<double, double> invariant_drift_rate(const FemOperator& op, const GridState& s);

}  // namespace nls::fem
