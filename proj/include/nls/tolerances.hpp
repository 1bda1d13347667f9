#pragma once

namespace nls {

/// Numerical thresholds shared across modules. Defaults are the values the
/// library is validated against; the harness may override any of them.
struct Tolerances {
  double grid_uniformity = 1e-14;
  double dft_roundtrip = 1e-13;
  double gradient_fd_step = 1e-7;
  double gradient_fd_rel = 1e-6;
  double conservation = 1e-12;
  double stage_residual = 1e-11;
  double soliton_boundary = 1e-14;
  int newton_max_iterations = 50;
  int newton_max_halvings = 10;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances t{};
  return t;
}

}  // namespace nls
