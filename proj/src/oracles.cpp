#include "nls/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "nls/errors.hpp"
#include "nls/spectral.hpp"
#include "nls/splitting.hpp"

namespace nls::oracles {

namespace {

// c * exp(p x + i q t)
struct Term {
  double c;
  double p;
  double q;
};

constexpr std::array<Term, 1> kNum1{{{2, 0, 1}}};
constexpr std::array<Term, 2> kDen1{{{1, 1, 0}, {1, -1, 0}}};

constexpr std::array<Term, 4> kNum2{{{6, 3, 17}, {6, 5, 17}, {2, 7, 9}, {2, 1, 9}}};
constexpr std::array<Term, 6> kDen2{
    {{3, 4, 16}, {4, 2, 8}, {4, 6, 8}, {1, 8, 8}, {1, 0, 8}, {3, 4, 0}}};

// The coefficient of e^{13x + 33it} is 36: the x -> -x symmetry pairs it
// with 36 e^{5x + 33it}, and u_3(x, 0) = sech x requires the x^13 row to sum to 56.
constexpr std::array<Term, 15> kNum3{{{80, 7, 49},
                                      {2, 1, 25},
                                      {16, 3, 33},
                                      {36, 5, 33},
                                      {20, 5, 49},
                                      {32, 7, 25},
                                      {10, 9, 9},
                                      {90, 9, 41},
                                      {40, 9, 57},
                                      {32, 11, 25},
                                      {80, 11, 49},
                                      {36, 13, 33},
                                      {20, 13, 49},
                                      {16, 15, 33},
                                      {2, 17, 25}}};
constexpr std::array<Term, 20> kDen3{{{64, 12, 24}, {36, 8, 24}, {18, 4, 16}, {64, 6, 24},
                                      {45, 10, 40}, {10, 12, 48}, {45, 8, 40}, {18, 4, 32},
                                      {10, 6, 48},  {9, 2, 24},   {45, 8, 8},  {45, 10, 8},
                                      {36, 10, 24}, {18, 14, 16}, {18, 14, 32}, {9, 16, 24},
                                      {1, 18, 24},  {1, 0, 24},   {10, 6, 0},  {10, 12, 0}}};

Complex sum_terms(std::span<const Term> terms, double x, double t, double shift) {
  Complex s{0.0, 0.0};
  for (const Term& term : terms) {
    const double mag = term.c * std::exp(term.p * x - shift);
    const double phase = term.q * t;
    s += Complex(mag * std::cos(phase), mag * std::sin(phase));
  }
  return s;
}

Complex evaluate(std::span<const Term> num, std::span<const Term> den, double x, double t) {
  double shift = -std::numeric_limits<double>::infinity();
  for (const Term& term : den) shift = std::max(shift, term.p * x);
  return sum_terms(num, x, t, shift) / sum_terms(den, x, t, shift);
}

}  // namespace

Complex soliton_exact(int n, double x, double t) {
  if (std::abs(x) > kSolitonCutoff) return {0.0, 0.0};
  switch (n) {
    case 1: return evaluate(kNum1, kDen1, x, t);
    case 2: return evaluate(kNum2, kDen2, x, t);
    case 3: return evaluate(kNum3, kDen3, x, t);
    default: throw ConfigError("soliton_exact: n must be 1, 2 or 3");
  }
}

ComplexVector soliton_on_grid(int n, const Grid& grid, double t) {
  ComplexVector u(grid.m);
  for (std::size_t j = 0; j < grid.m; ++j) u[j] = soliton_exact(n, grid.nodes[j], t);
  return u;
}

std::pair<GridState, double> soliton_initial(int n, GridPtr grid, std::string* warning) {
  if (n < 1 || n > 3) throw ConfigError("soliton_initial: n must be 1, 2 or 3");
  GridState s{grid, ComplexVector(grid->m), 0.0};
  for (std::size_t j = 0; j < grid->m; ++j) s.u[j] = 1.0 / std::cosh(grid->nodes[j]);
  const double edge = std::max(std::abs(s.u.front()), 1.0 / std::cosh(grid->x_right));
  if (edge > 1e-14 && warning)
    *warning = "soliton_initial: boundary value " + std::to_string(edge) +
               " exceeds 1e-14; the domain is too small for a periodic soliton run";
  return {std::move(s), 2.0 * n * n};
}

Complex semiclassical_value(Phase phase, double eps, double x) {
  const double amp = std::exp(-x * x);
  if (phase == Phase::constant_phase) return {amp, 0.0};
  const double theta = 1.0 / (eps * (std::exp(x) + std::exp(-x)));
  return {amp * std::cos(theta), amp * std::sin(theta)};
}

GridState semiclassical_initial(Phase phase, double eps, GridPtr grid) {
  if (!(eps > 0.0)) throw ConfigError("semiclassical_initial: eps must be positive");
  GridState s{grid, ComplexVector(grid->m), 0.0};
  for (std::size_t j = 0; j < grid->m; ++j) s.u[j] = semiclassical_value(phase, eps, grid->nodes[j]);
  return s;
}

GridState initial_state(const Problem& p, GridPtr grid) {
  if (const auto* sol = std::get_if<SolitonData>(&p.ic)) return soliton_initial(sol->n, grid).first;
  const auto& sc = std::get<SemiclassicalData>(p.ic);
  return semiclassical_initial(sc.phase, sc.eps, grid);
}

RealVector density(std::span<const Complex> u) {
  RealVector rho(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) rho[j] = std::norm(u[j]);
  return rho;
}

RealVector density(const GridState& s) { return density(std::span<const Complex>(s.u)); }

GridState reference_solution(const Problem& p, const ReferenceSpec& spec, double T) {
  if (p.bc != Boundary::periodic) throw ConfigError("reference_solution: periodic problems only");
  auto grid = make_grid_ptr(p.x_left, p.x_right, spec.m, Boundary::periodic);
  const spectral::SpectralOperator op(grid, p.a);
  GridState s0 = initial_state(p, grid);
  if (T == s0.t) return s0;
  return splitting::integrate_splitting(s0, splitting::scheme("AK4"), op, p.b, spec.dt, T).first;
}

ComplexVector restrict_to(const GridState& fine, const Grid& coarse) {
  const Grid& f = *fine.grid;
  if (f.bc != Boundary::periodic || coarse.bc != Boundary::periodic)
    throw ConfigError("restrict_to: periodic grids only");
  if (coarse.m == 0 || f.m % coarse.m != 0)
    throw ConfigError("restrict_to: fine grid is not an integer refinement of the coarse grid");
  const double tol = 1e-12 * std::max(1.0, f.length());
  if (std::abs(f.x_left - coarse.x_left) > tol || std::abs(f.x_right - coarse.x_right) > tol)
    throw ConfigError("restrict_to: grids cover different domains");
  const std::size_t r = f.m / coarse.m;
  ComplexVector out(coarse.m);
  for (std::size_t j = 0; j < coarse.m; ++j) out[j] = fine.u[j * r];
  return out;
}

}  // namespace nls::oracles
