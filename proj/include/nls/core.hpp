#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace nls {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;
using RealVector = std::vector<double>;

enum class Boundary { periodic, natural };

std::string to_string(Boundary bc);

/// Uniform 1D grid. Periodic grids drop the duplicate right endpoint,
/// natural grids keep both endpoints.
struct Grid {
  double x_left = 0.0;
  double x_right = 1.0;
  std::size_t m = 0;
  double dx = 0.0;
  Boundary bc = Boundary::periodic;
  RealVector nodes;

  double length() const { return x_right - x_left; }
};

using GridPtr = std::shared_ptr<const Grid>;

/// Throws ConfigError for m < 4 or a degenerate domain.
Grid make_grid(double x_left, double x_right, std::size_t m, Boundary bc);
GridPtr make_grid_ptr(double x_left, double x_right, std::size_t m, Boundary bc);

struct GridState {
  GridPtr grid;
  ComplexVector u;
  double t = 0.0;

  std::size_t size() const { return u.size(); }
};

/// Called with (t, u) at the initial time and after every accepted step.
using StepObserver = std::function<void(double, std::span<const Complex>)>;

/// Throws DimensionError on a length mismatch and NumericalFailure on
/// non-finite entries.
void validate(const GridState& s);
bool all_finite(std::span<const Complex> u);

/// Lossless view of a complex vector as interleaved [re_0, im_0, re_1, ...].
inline std::span<const double> interleaved(std::span<const Complex> u) {
  return {reinterpret_cast<const double*>(u.data()), 2 * u.size()};
}
inline std::span<double> interleaved(std::span<Complex> u) {
  return {reinterpret_cast<double*>(u.data()), 2 * u.size()};
}
RealVector to_interleaved(std::span<const Complex> u);
ComplexVector from_interleaved(std::span<const double> v);

// ---------------------------------------------------------------------------
// Problem description

struct SolitonData {
  int n = 1;
};

enum class Phase { constant_phase, varying_phase };

struct SemiclassicalData {
  Phase phase = Phase::constant_phase;
  double eps = 0.2;
};

using InitialCondition = std::variant<SolitonData, SemiclassicalData>;

/// u_t = i a u_xx + i b |u|^2 u on [x_left, x_right].
struct Problem {
  double x_left = -35.0;
  double x_right = 35.0;
  double a = 1.0;
  double b = 2.0;
  InitialCondition ic = SolitonData{1};
  Boundary bc = Boundary::periodic;
};

/// i u_t + u_xx + beta |u|^2 u = 0 on [-35, 35], sech initial data, beta = 2 n^2.
Problem soliton_problem(int n);

/// i eps u_t + (eps^2/2) u_xx + |u|^2 u = 0 on [-8, 8]. Dividing by eps gives
/// a = eps/2 and b = 1/eps.
Problem semiclassical_problem(double eps, Phase phase);

// ---------------------------------------------------------------------------
// Discrete invariants

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      carry_ += (sum_ - t) + x;
    else
      carry_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double discrete_mass(std::span<const Complex> u, const Grid& grid);
double discrete_mass(const GridState& s);

/// dx * sum (|(u_{j+1} - u_j)/dx|^2 - beta/2 |u_j|^4). The difference wraps
/// on periodic grids and stops at m-1 on natural grids.
double discrete_energy(std::span<const Complex> u, const Grid& grid, double beta);
double discrete_energy(const GridState& s, double beta);

enum class InvariantKind { mass, energy };

std::string to_string(InvariantKind kind);

/// Scalar functional on the state together with its gradient with respect
/// to the interleaved real/imaginary coordinates.
class InvariantFunctional {
 public:
  using Evaluate = std::function<double(std::span<const Complex>)>;
  using Gradient = std::function<void(std::span<const Complex>, std::span<double>)>;

  InvariantFunctional(InvariantKind kind, Evaluate evaluate, Gradient gradient);

  InvariantKind kind() const { return kind_; }
  /// Quadratic functionals admit closed-form relaxation.
  bool is_quadratic() const { return kind_ == InvariantKind::mass; }

  double operator()(std::span<const Complex> u) const { return evaluate_(u); }
  double evaluate(const GridState& s) const { return evaluate_(s.u); }

  void gradient(std::span<const Complex> u, std::span<double> out) const;
  RealVector gradient(const GridState& s) const;

 private:
  InvariantKind kind_;
  Evaluate evaluate_;
  Gradient gradient_;
};

InvariantFunctional mass_functional(const Grid& grid);
InvariantFunctional energy_functional(const Grid& grid, double beta);

/// Real inner product of two complex vectors viewed as interleaved reals.
double real_dot(std::span<const Complex> x, std::span<const Complex> y);
double dot(std::span<const double> x, std::span<const double> y);
double max_abs_diff(std::span<const Complex> x, std::span<const Complex> y);
double max_abs(std::span<const Complex> x);

}  // namespace nls
