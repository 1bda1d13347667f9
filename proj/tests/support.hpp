#pragma once

// Independent reference implementations used only by the tests.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "nls/core.hpp"

namespace testing {

using nls::Complex;
using nls::ComplexVector;
using nls::RealVector;

inline constexpr double kPi = std::numbers::pi;

inline double sech(double x) { return 1.0 / std::cosh(x); }
/// d^2/dx^2 sech = sech - 2 sech^3.
inline double sech_dd(double x) {
  const double s = sech(x);
  return s - 2.0 * s * s * s;
}

/// Forward DFT by direct summation, same sign and scaling as the library.
inline ComplexVector direct_dft(std::span<const Complex> u) {
  const std::size_t m = u.size();
  ComplexVector out(m);
  for (std::size_t k = 0; k < m; ++k) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double arg = -2.0 * kPi * static_cast<double>((k * j) % m) / static_cast<double>(m);
      acc += u[j] * Complex(std::cos(arg), std::sin(arg));
    }
    out[k] = acc;
  }
  return out;
}

inline ComplexVector random_state(std::size_t m, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ComplexVector u(m);
  for (auto& z : u) z = scale * Complex(d(rng), d(rng)) / std::sqrt(2.0);
  return u;
}

/// Random state with a smooth envelope so difference quotients stay O(1).
inline ComplexVector smooth_random_state(const nls::Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const double L = g.length();
  ComplexVector u(g.m, 0.0);
  for (int k = 0; k < 4; ++k) {
    const Complex c(d(rng), d(rng));
    const double phase = d(rng);
    for (std::size_t j = 0; j < g.m; ++j)
      u[j] += 0.25 * c * std::exp(Complex(0.0, 2.0 * kPi * k * (g.nodes[j] - g.x_left) / L + phase));
  }
  return u;
}

/// Central differences of f along every interleaved coordinate.
inline RealVector fd_gradient(const std::function<double(std::span<const Complex>)>& f,
                              ComplexVector u, double h) {
  RealVector g(2 * u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    for (int part = 0; part < 2; ++part) {
      const Complex e = part == 0 ? Complex(h, 0.0) : Complex(0.0, h);
      const Complex keep = u[j];
      u[j] = keep + e;
      const double fp = f(u);
      u[j] = keep - e;
      const double fm = f(u);
      u[j] = keep;
      g[2 * j + part] = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_rel_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) num = std::max(num, std::abs(a[i] - b[i]));
  return num / std::max(max_abs(b), 1e-300);
}

/// Least-squares slope, kept separate from the harness fit.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<double, 4>;  // row-major

inline Vec2 mul(const Mat2& A, const Vec2& x) {
  return {A[0] * x[0] + A[1] * x[1], A[2] * x[0] + A[3] * x[1]};
}

/// (I - mu A)^{-1} rhs by Cramer's rule.
inline Vec2 shifted_solve(const Mat2& A, double mu, const Vec2& rhs) {
  const double m00 = 1.0 - mu * A[0], m01 = -mu * A[1];
  const double m10 = -mu * A[2], m11 = 1.0 - mu * A[3];
  const double det = m00 * m11 - m01 * m10;
  return {(m11 * rhs[0] - m01 * rhs[1]) / det, (-m10 * rhs[0] + m00 * rhs[1]) / det};
}

/// One DIRK step of y' = A y with lower-triangular `a` (s x s) and weights b.
inline Vec2 dirk_step(const Mat2& A, const std::vector<double>& a, const std::vector<double>& b,
                      std::size_t s, const Vec2& y, double dt) {
  std::vector<Vec2> k(s);
  for (std::size_t i = 0; i < s; ++i) {
    Vec2 rhs = y;
    for (std::size_t j = 0; j < i; ++j) {
      rhs[0] += dt * a[i * s + j] * k[j][0];
      rhs[1] += dt * a[i * s + j] * k[j][1];
    }
    const Vec2 g = shifted_solve(A, dt * a[i * s + i], rhs);
    k[i] = mul(A, g);
  }
  Vec2 out = y;
  for (std::size_t i = 0; i < s; ++i) {
    out[0] += dt * b[i] * k[i][0];
    out[1] += dt * b[i] * k[i][1];
  }
  return out;
}

}  // namespace testing
