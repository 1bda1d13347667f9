#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "nls/core.hpp"
#include "nls/fem.hpp"
#include "nls/spectral.hpp"

namespace nls::imexrk {

/// Additive Runge-Kutta pair sharing c and the weights between the implicit
/// (DIRK) and explicit parts. Matrices are row-major s x s.
struct ImExTableau {
  std::string name;
  std::size_t s = 0;
  RealVector a_im;
  RealVector a_ex;
  RealVector c;
  RealVector b1;  // main weights
  RealVector b2;  // embedded weights
  int p = 0;
  int q = 0;

  double im(std::size_t i, std::size_t j) const { return a_im[i * s + j]; }
  double ex(std::size_t i, std::size_t j) const { return a_ex[i * s + j]; }
};

/// "ImEx3" (ARK3(2)4L[2]SA) or "ImEx4" (ARK4(3)6L[2]SA); throws LookupError.
ImExTableau tableau(const std::string& name);

enum class Weights { main, embedded };

/// Max |residual| over every additive order condition of order 1..`order`
/// (all implicit/explicit colourings of the rooted trees). Supports
/// order <= 5; throws ConfigError beyond.
double order_conditions_residual(const ImExTableau& t, int order, Weights w = Weights::main);

/// Max |row sum - c| over both matrices.
double row_sum_residual(const ImExTableau& t);

/// Stiff linear part f_Im. `solve` returns g with (I - mu f_Im) g = rhs and
/// f_Im(g) alongside.
class ImplicitPart {
 public:
  virtual ~ImplicitPart() = default;
  virtual void apply(std::span<const Complex> u, std::span<Complex> out) = 0;
  virtual void solve(double mu, std::span<const Complex> rhs, std::span<Complex> g,
                     std::span<Complex> fg) = 0;
};

class ExplicitPart {
 public:
  virtual ~ExplicitPart() = default;
  virtual void apply(std::span<const Complex> u, std::span<Complex> out) = 0;
};

class SpectralImplicit final : public ImplicitPart {
 public:
  explicit SpectralImplicit(const spectral::SpectralOperator& op) : op_(op) {}
  void apply(std::span<const Complex> u, std::span<Complex> out) override;
  void solve(double mu, std::span<const Complex> rhs, std::span<Complex> g,
             std::span<Complex> fg) override;

 private:
  const spectral::SpectralOperator& op_;
};

class NonlinearExplicit final : public ExplicitPart {
 public:
  explicit NonlinearExplicit(double b) : b_(b) {}
  void apply(std::span<const Complex> u, std::span<Complex> out) override;

 private:
  double b_;
};

/// FEM stage solves. Keeps the factorization of the last mu, so an ESDIRK
/// step with constant diagonal factors once.
class FemImplicit final : public ImplicitPart {
 public:
  explicit FemImplicit(const fem::FemOperator& op) : op_(op) {}
  void apply(std::span<const Complex> u, std::span<Complex> out) override;
  void solve(double mu, std::span<const Complex> rhs, std::span<Complex> g,
             std::span<Complex> fg) override;

  std::size_t factorizations() const { return factorizations_; }

 private:
  const fem::FemOperator& op_;
  std::optional<fem::StageFactorization> fac_;
  std::size_t factorizations_ = 0;
};

class FemExplicit final : public ExplicitPart {
 public:
  explicit FemExplicit(const fem::FemOperator& op) : op_(op) {}
  void apply(std::span<const Complex> u, std::span<Complex> out) override;

 private:
  const fem::FemOperator& op_;
};

struct StepIncrements {
  ComplexVector u_next;  // U^n + dt d1
  ComplexVector d1;
  ComplexVector d2;

  /// Embedded solution U^n + dt d2.
  ComplexVector u_hat(std::span<const Complex> un, double dt) const;
};

/// One ImEx step from `un`. Throws NumericalFailure naming the stage if a
/// stage value is not finite.
StepIncrements imex_step(std::span<const Complex> un, const ImExTableau& t, double dt,
                         ImplicitPart& fim, ExplicitPart& fex);

}  // namespace nls::imexrk
