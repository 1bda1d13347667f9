#include "nls/spectral.hpp"

#include <cmath>
#include <numbers>

#include "nls/errors.hpp"

namespace nls::spectral {

namespace {

/// e^{i theta}, with cos and sin each moved by at most one ulp to bring
/// cos^2 + sin^2 closest to 1.
Complex unit_phase(double theta) {
  const double c0 = std::cos(theta), s0 = std::sin(theta);
  Complex best(c0, s0);
  long double best_err = 2.0L;
  for (const double c : {std::nextafter(c0, -2.0), c0, std::nextafter(c0, 2.0)})
    for (const double s : {std::nextafter(s0, -2.0), s0, std::nextafter(s0, 2.0)}) {
      const long double lc = c, ls = s;
      const long double err = std::fabs(lc * lc + ls * ls - 1.0L);
      if (err < best_err) best_err = err, best = Complex(c, s);
    }
  return best;
}

}  // namespace

RealVector wavenumbers(const Grid& grid) {
  if (grid.bc != Boundary::periodic)
    throw UnsupportedBoundary("wavenumbers: spectral discretization needs a periodic grid");
  const std::size_t m = grid.m;
  const double scale = 2.0 * std::numbers::pi / grid.length();
  RealVector xi(m);
  const auto half = static_cast<long>(m / 2);
  for (std::size_t k = 0; k < m; ++k) {
    auto signed_k = static_cast<long>(k);
    if (signed_k >= static_cast<long>(m) - half) signed_k -= static_cast<long>(m);
    xi[k] = scale * static_cast<double>(signed_k);
  }
  return xi;
}

SpectralOperator::SpectralOperator(GridPtr grid, double a)
    : grid_(std::move(grid)), a_(a), xi_(wavenumbers(*grid_)),
      dft_(std::make_shared<const Dft>(grid_->m)) {}

void SpectralOperator::check(std::size_t n) const {
  if (n != grid_->m) throw DimensionError("spectral operator: length does not match grid");
}

void SpectralOperator::apply(std::span<const Complex> u, std::span<Complex> out) const {
  check(u.size());
  check(out.size());
  ComplexVector hat(u.size());
  dft_->forward(u, hat);
  for (std::size_t k = 0; k < hat.size(); ++k) hat[k] *= symbol(k);
  dft_->inverse(hat, out);
}

void SpectralOperator::stage_solve(std::span<const Complex> rhs, double mu,
                                   std::span<Complex> g) const {
  check(rhs.size());
  check(g.size());
  if (mu == 0.0) {
    std::copy(rhs.begin(), rhs.end(), g.begin());
    return;
  }
  ComplexVector hat(rhs.size());
  dft_->forward(rhs, hat);
  for (std::size_t k = 0; k < hat.size(); ++k) hat[k] /= (1.0 - mu * symbol(k));
  dft_->inverse(hat, g);
}

void SpectralOperator::stage_solve_apply(std::span<const Complex> rhs, double mu,
                                         std::span<Complex> g, std::span<Complex> fg) const {
  check(rhs.size());
  check(g.size());
  check(fg.size());
  ComplexVector hat(rhs.size());
  dft_->forward(rhs, hat);
  if (mu != 0.0)
    for (std::size_t k = 0; k < hat.size(); ++k) hat[k] /= (1.0 - mu * symbol(k));
  if (mu == 0.0)
    std::copy(rhs.begin(), rhs.end(), g.begin());
  else
    dft_->inverse(hat, g);
  for (std::size_t k = 0; k < hat.size(); ++k) hat[k] *= symbol(k);
  dft_->inverse(hat, fg);
}

ComplexVector SpectralOperator::flow_multipliers(double dt) const {
  ComplexVector mult(xi_.size());
  for (std::size_t k = 0; k < mult.size(); ++k) mult[k] = unit_phase(-a_ * xi_[k] * xi_[k] * dt);
  return mult;
}

void SpectralOperator::linear_flow(std::span<const Complex> u, std::span<const Complex> multipliers,
                                   std::span<Complex> out) const {
  check(u.size());
  check(out.size());
  check(multipliers.size());
  ComplexVector hat(u.size());
  dft_->forward(u, hat);
  for (std::size_t k = 0; k < hat.size(); ++k) hat[k] *= multipliers[k];
  dft_->inverse(hat, out);
}

void SpectralOperator::linear_flow(std::span<const Complex> u, double dt,
                                   std::span<Complex> out) const {
  linear_flow(u, flow_multipliers(dt), out);
}

void nonlinear_term(std::span<const Complex> u, double b, std::span<Complex> out) {
  if (u.size() != out.size()) throw DimensionError("nonlinear_term: length mismatch");
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = Complex(0.0, b * std::norm(u[j])) * u[j];
}

void nonlinear_flow(std::span<const Complex> u, double b, double dt, std::span<Complex> out) {
  if (u.size() != out.size()) throw DimensionError("nonlinear_flow: length mismatch");
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double phase = b * std::norm(u[j]) * dt;
    out[j] = u[j] * Complex(std::cos(phase), std::sin(phase));
  }
}

namespace {
void require_same_grid(const SpectralOperator& op, const GridState& s) {
  validate(s);
  if (s.u.size() != op.grid().m) throw DimensionError("state is not on the operator's grid");
}
}  // namespace

ComplexVector dispersion_apply(const SpectralOperator& op, const GridState& s) {
  require_same_grid(op, s);
  ComplexVector out(s.u.size());
  op.apply(s.u, out);
  return out;
}

ComplexVector dispersion_stage_solve(const SpectralOperator& op, const GridState& rhs, double mu) {
  require_same_grid(op, rhs);
  ComplexVector out(rhs.u.size());
  op.stage_solve(rhs.u, mu, out);
  return out;
}

ComplexVector nonlinear_term(const GridState& s, double b) {
  validate(s);
  ComplexVector out(s.u.size());
  nonlinear_term(s.u, b, out);
  return out;
}

GridState exact_linear_flow(const SpectralOperator& op, const GridState& s, double dt) {
  require_same_grid(op, s);
  GridState out{s.grid, ComplexVector(s.u.size()), s.t};
  op.linear_flow(s.u, dt, out.u);
  return out;
}

GridState exact_nonlinear_flow(const GridState& s, double b, double dt) {
  validate(s);
  GridState out{s.grid, ComplexVector(s.u.size()), s.t};
  nonlinear_flow(s.u, b, dt, out.u);
  return out;
}

}  // namespace nls::spectral
