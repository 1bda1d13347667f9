#include "nls/fem.hpp"

#include <cmath>

#include "nls/errors.hpp"

namespace nls::fem {

FemOperator::FemOperator(std::size_t m, double dx, Boundary bc, double beta, double a)
    : m_(m), dx_(dx), bc_(bc), beta_(beta), a_(a), itilde_(m, 1.0), s_diag_(m, -2.0) {
  if (m < 4) throw ConfigError("fem: need at least 4 nodes, got " + std::to_string(m));
  if (!(dx > 0.0)) throw ConfigError("fem: dx must be positive");
  if (!(a > 0.0)) throw ConfigError("fem: dispersion coefficient must be positive");
  if (bc == Boundary::natural) {
    itilde_.front() = itilde_.back() = 0.5;
    s_diag_.front() = s_diag_.back() = -1.0;
  }
}

FemOperator assemble(std::size_t m, double dx, Boundary bc, double beta, double a) {
  return FemOperator(m, dx, bc, beta, a);
}

FemOperator assemble(const Grid& grid, double beta, double a) {
  return FemOperator(grid.m, grid.dx, grid.bc, beta, a);
}

RealVector FemOperator::dense_S() const {
  const std::size_t n = 2 * m_;
  RealVector s(n * n, 0.0);
  // c * A at block (r, c): entries (2r, 2c+1) = c and (2r+1, 2c) = -c.
  auto put = [&](std::size_t r, std::size_t c, double coef) {
    s[(2 * r) * n + 2 * c + 1] += coef;
    s[(2 * r + 1) * n + 2 * c] -= coef;
  };
  for (std::size_t j = 0; j < m_; ++j) {
    put(j, j, s_diag_[j]);
    if (j > 0) put(j, j - 1, 1.0);
    if (j + 1 < m_) put(j, j + 1, 1.0);
  }
  if (bc_ == Boundary::periodic) {
    put(0, m_ - 1, 1.0);
    put(m_ - 1, 0, 1.0);
  }
  return s;
}

RealVector FemOperator::itilde_diagonal() const {
  RealVector d(2 * m_);
  for (std::size_t j = 0; j < m_; ++j) d[2 * j] = d[2 * j + 1] = itilde_[j];
  return d;
}

void FemOperator::apply_S(std::span<const double> u, std::span<double> out) const {
  if (u.size() != 2 * m_ || out.size() != 2 * m_) throw DimensionError("fem: length mismatch");
  const bool periodic = bc_ == Boundary::periodic;
  for (std::size_t j = 0; j < m_; ++j) {
    double v = s_diag_[j] * u[2 * j];
    double w = s_diag_[j] * u[2 * j + 1];
    if (j > 0) {
      v += u[2 * (j - 1)];
      w += u[2 * (j - 1) + 1];
    } else if (periodic) {
      v += u[2 * (m_ - 1)];
      w += u[2 * (m_ - 1) + 1];
    }
    if (j + 1 < m_) {
      v += u[2 * (j + 1)];
      w += u[2 * (j + 1) + 1];
    } else if (periodic) {
      v += u[0];
      w += u[1];
    }
    // A [v, w] = [w, -v]
    out[2 * j] = w;
    out[2 * j + 1] = -v;
  }
}

void FemOperator::apply_linear(std::span<const double> u, std::span<double> out) const {
  apply_S(u, out);
  const double scale = -a_ / (dx_ * dx_);
  for (std::size_t j = 0; j < m_; ++j) {
    const double c = scale / itilde_[j];
    out[2 * j] *= c;
    out[2 * j + 1] *= c;
  }
}

void FemOperator::apply_nonlinear(std::span<const double> u, std::span<double> out) const {
  if (u.size() != 2 * m_ || out.size() != 2 * m_) throw DimensionError("fem: length mismatch");
  for (std::size_t j = 0; j < m_; ++j) {
    const double v = u[2 * j];
    const double w = u[2 * j + 1];
    const double r2 = v * v + w * w;
    out[2 * j] = -beta_ * r2 * w;
    out[2 * j + 1] = beta_ * r2 * v;
  }
}

void fem_rhs(const FemOperator& op, std::span<const double> u, std::span<double> out) {
  op.apply_linear(u, out);
  RealVector nl(u.size());
  op.apply_nonlinear(u, nl);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += nl[i];
}

RealVector fem_rhs(const FemOperator& op, const GridState& s) {
  validate(s);
  if (s.u.size() != op.m()) throw DimensionError("fem_rhs: state size does not match operator");
  RealVector out(2 * op.m());
  fem_rhs(op, interleaved(std::span<const Complex>(s.u)), out);
  return out;
}

// ---------------------------------------------------------------------------

StageFactorization::StageFactorization(const FemOperator& op, double mu)
    : mu_(mu), cyclic_(op.bc() == Boundary::periodic) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("stage_factorize: mu must be >= 0");
  const std::size_t m = op.m();
  const double sigma = mu * op.a() / (op.dx() * op.dx());
  itilde_.resize(m);
  ComplexVector diag(m);
  lower_.assign(m, Complex(0.0, -sigma));
  upper_.assign(m, Complex(0.0, -sigma));
  lower_.front() = 0.0;
  upper_.back() = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    itilde_[j] = op.itilde(j);
    diag[j] = Complex(op.itilde(j), -sigma * op.s_diag(j));
  }
  if (cyclic_) {
    corner_top_ = Complex(0.0, -sigma);
    corner_bottom_ = Complex(0.0, -sigma);
    shift_ = -diag.front();
    diag.front() -= shift_;
    diag.back() -= corner_bottom_ * corner_top_ / shift_;
  }

  c_prime_.resize(m);
  d_inv_.resize(m);
  Complex c_prev{0.0, 0.0};
  for (std::size_t j = 0; j < m; ++j) {
    const Complex denom = j == 0 ? diag[0] : diag[j] - lower_[j] * c_prev;
    if (std::abs(denom) == 0.0 || !std::isfinite(std::abs(denom)))
      throw NumericalFailure("stage_factorize: zero pivot at node " + std::to_string(j));
    d_inv_[j] = 1.0 / denom;
    c_prime_[j] = upper_[j] * d_inv_[j];
    c_prev = c_prime_[j];
  }

  if (cyclic_) {
    z_.assign(m, Complex(0.0, 0.0));
    z_.front() = shift_;
    z_.back() = corner_bottom_;
    solve_tridiagonal(z_);
  }
}

void StageFactorization::solve_tridiagonal(std::span<Complex> x) const {
  const std::size_t m = x.size();
  x[0] *= d_inv_[0];
  for (std::size_t j = 1; j < m; ++j) x[j] = (x[j] - lower_[j] * x[j - 1]) * d_inv_[j];
  for (std::size_t j = m - 1; j-- > 0;) x[j] -= c_prime_[j] * x[j + 1];
}

void StageFactorization::solve(std::span<const double> rhs, std::span<double> g) const {
  const std::size_t m = itilde_.size();
  if (rhs.size() != 2 * m || g.size() != 2 * m) throw DimensionError("stage_solve: length mismatch");
  ComplexVector x(m);
  for (std::size_t j = 0; j < m; ++j) x[j] = itilde_[j] * Complex(rhs[2 * j], rhs[2 * j + 1]);
  if (mu_ != 0.0) {
    solve_tridiagonal(x);
    if (cyclic_) {
      const Complex num = x.front() + corner_top_ * x.back() / shift_;
      const Complex den = 1.0 + z_.front() + corner_top_ * z_.back() / shift_;
      const Complex factor = num / den;
      for (std::size_t j = 0; j < m; ++j) x[j] -= factor * z_[j];
    }
  } else {
    for (std::size_t j = 0; j < m; ++j) x[j] /= itilde_[j];
  }
  for (std::size_t j = 0; j < m; ++j) {
    g[2 * j] = x[j].real();
    g[2 * j + 1] = x[j].imag();
  }
}

RealVector StageFactorization::solve(std::span<const double> rhs) const {
  RealVector g(rhs.size());
  solve(rhs, g);
  return g;
}

StageFactorization stage_factorize(const FemOperator& op, double mu) {
  return StageFactorization(op, mu);
}

RealVector stage_solve(const StageFactorization& fac, std::span<const double> rhs) {
  return fac.solve(rhs);
}

// ---------------------------------------------------------------------------

void grad_mass(const FemOperator& op, std::span<const double> u, std::span<double> out) {
  if (u.size() != 2 * op.m() || out.size() != u.size()) throw DimensionError("grad_mass: length mismatch");
  for (std::size_t j = 0; j < op.m(); ++j) {
    const double c = 2.0 * op.dx() * op.itilde(j);
    out[2 * j] = c * u[2 * j];
    out[2 * j + 1] = c * u[2 * j + 1];
  }
}

void grad_energy(const FemOperator& op, std::span<const double> u, std::span<double> out) {
  const std::size_t m = op.m();
  if (u.size() != 2 * m || out.size() != u.size()) throw DimensionError("grad_energy: length mismatch");
  const bool periodic = op.bc() == Boundary::periodic;
  const double c = 2.0 * op.a() / op.dx();
  const double q = 2.0 * op.beta() * op.dx();
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t p = 0; p < 2; ++p) {
      const double here = u[2 * j + p];
      double diff = 0.0;
      if (j > 0) {
        diff += here - u[2 * (j - 1) + p];
      } else if (periodic) {
        diff += here - u[2 * (m - 1) + p];
      }
      if (j + 1 < m) {
        diff += here - u[2 * (j + 1) + p];
      } else if (periodic) {
        diff += here - u[p];
      }
      out[2 * j + p] = c * diff;
    }
    const double v = u[2 * j];
    const double w = u[2 * j + 1];
    const double r2 = v * v + w * w;
    out[2 * j] -= q * op.itilde(j) * r2 * v;
    out[2 * j + 1] -= q * op.itilde(j) * r2 * w;
  }
}

RealVector grad_mass(const FemOperator& op, const GridState& s) {
  validate(s);
  RealVector out(2 * s.u.size());
  grad_mass(op, interleaved(std::span<const Complex>(s.u)), out);
  return out;
}

RealVector grad_energy(const FemOperator& op, const GridState& s) {
  validate(s);
  RealVector out(2 * s.u.size());
  grad_energy(op, interleaved(std::span<const Complex>(s.u)), out);
  return out;
}

double fem_mass(const FemOperator& op, std::span<const Complex> u) {
  if (u.size() != op.m()) throw DimensionError("fem_mass: length mismatch");
  CompensatedSum sum;
  for (std::size_t j = 0; j < u.size(); ++j) sum += op.itilde(j) * std::norm(u[j]);
  return op.dx() * sum.value();
}

double fem_energy(const FemOperator& op, std::span<const Complex> u) {
  const std::size_t m = op.m();
  if (u.size() != m) throw DimensionError("fem_energy: length mismatch");
  const double inv_dx = 1.0 / op.dx();
  CompensatedSum kinetic;
  CompensatedSum quartic;
  for (std::size_t j = 0; j < m; ++j) {
    const double a2 = std::norm(u[j]);
    quartic += op.itilde(j) * a2 * a2;
    if (j + 1 < m)
      kinetic += std::norm((u[j + 1] - u[j]) * inv_dx);
    else if (op.bc() == Boundary::periodic)
      kinetic += std::norm((u[0] - u[j]) * inv_dx);
  }
  return op.dx() * (op.a() * kinetic.value() - 0.5 * op.beta() * quartic.value());
}

InvariantFunctional mass_functional(const FemOperator& op) {
  return InvariantFunctional(
      InvariantKind::mass, [op](std::span<const Complex> u) { return fem_mass(op, u); },
      [op](std::span<const Complex> u, std::span<double> out) { grad_mass(op, interleaved(u), out); });
}

InvariantFunctional energy_functional(const FemOperator& op) {
  return InvariantFunctional(
      InvariantKind::energy, [op](std::span<const Complex> u) { return fem_energy(op, u); },
      [op](std::span<const Complex> u, std::span<double> out) { grad_energy(op, interleaved(u), out); });
}

std::pair<double, double> invariant_drift_rate(const FemOperator& op, const GridState& s) {
  const RealVector f = fem_rhs(op, s);
  const RealVector g1 = grad_mass(op, s);
  const RealVector g2 = grad_energy(op, s);
  return {dot(g1, f), dot(g2, f)};
}

}  // namespace nls::fem
