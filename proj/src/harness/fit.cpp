#include "nls/harness/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "nls/errors.hpp"

namespace nls::harness {

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("least_squares_slope: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw FitError("least_squares_slope: need at least two points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("least_squares_slope: all abscissae coincide");
  return sxy / sxx;
}

double fit_growth_exponent(std::span<const std::pair<double, double>> series, double t_a, double t_b,
                           std::size_t min_samples) {
  if (!(t_a > 0.0) || !(t_b > t_a)) throw FitError("fit_growth_exponent: window must satisfy 0 < t_a < t_b");
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& [t, e] : series) {
    if (t < t_a || t > t_b) continue;
    if (!(e > 0.0) || !std::isfinite(e))
      throw FitError("fit_growth_exponent: non-positive error " + std::to_string(e) + " at t = " +
                     std::to_string(t));
    lx.push_back(std::log(t));
    ly.push_back(std::log(e));
  }
  if (lx.size() < min_samples)
    throw FitError("fit_growth_exponent: " + std::to_string(lx.size()) + " samples in window, need " +
                   std::to_string(min_samples));
  return least_squares_slope(lx, ly);
}

double convergence_order(std::span<const double> dt, std::span<const double> err, std::size_t tail) {
  if (dt.size() != err.size()) throw DimensionError("convergence_order: length mismatch");
  std::vector<std::size_t> idx(dt.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return dt[a] < dt[b]; });
  if (idx.size() > tail) idx.resize(tail);
  if (idx.size() < 2) throw FitError("convergence_order: need at least two step sizes");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i : idx) {
    if (!(err[i] > 0.0) || !std::isfinite(err[i]))
      throw FitError("convergence_order: unusable error at dt = " + std::to_string(dt[i]));
    lx.push_back(std::log(dt[i]));
    ly.push_back(std::log(err[i]));
  }
  return least_squares_slope(lx, ly);
}

}  // namespace nls::harness
