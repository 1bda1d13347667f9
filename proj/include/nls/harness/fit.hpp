#pragma once

#include <cstddef>
#include <span>
#include <utility>

namespace nls::harness {

/// Least-squares slope of y against x. Throws FitError with fewer than two
/// points or a degenerate x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

/// Slope of log(err) against log(t) over samples with t in [t_a, t_b].
/// Throws FitError with fewer than `min_samples` samples in the window or a
/// non-positive sample there.
double fit_growth_exponent(std::span<const std::pair<double, double>> series, double t_a, double t_b,
                           std::size_t min_samples = 10);

/// Observed order: slope of log(err) against log(dt) over the `tail`
/// smallest step sizes. Non-finite or non-positive errors throw FitError.
double convergence_order(std::span<const double> dt, std::span<const double> err, std::size_t tail);

}  // namespace nls::harness
