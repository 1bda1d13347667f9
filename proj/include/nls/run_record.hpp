#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace nls {

enum class Disposition { accepted, eps_rejected, conservation_rejected };

std::string to_string(Disposition d);

/// One attempted step.
struct StepRow {
  double t = 0.0;  // time at the start of the attempt
  double dt = 0.0;
  double eps = 0.0;
  double Gamma = 0.0;
  double residual = 0.0;
  Disposition disposition = Disposition::accepted;
};

struct RunSummary {
  double final_time = 0.0;
  double final_error = -1.0;  // max-norm error vs oracle; negative when not computed
  double max_mass_drift = 0.0;
  double max_energy_drift = 0.0;
  double runtime_seconds = 0.0;
  std::size_t accepted = 0;
  std::size_t eps_rejected = 0;
  std::size_t conservation_rejected = 0;
  double endpoint_offset = 0.0;  // |t_final - T|
};

struct RunRecord {
  std::vector<StepRow> steps;
  RunSummary summary;
  std::vector<std::string> warnings;

  void log(const StepRow& row);
};

}  // namespace nls
