#pragma once

#include <string>
#include <variant>
#include <vector>

#include "nls/harness/config.hpp"
#include "nls/run_record.hpp"

namespace nls::harness {

/// Empty, real, integer or text.
using Cell = std::variant<std::monostate, double, long long, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
  /// Index of `column`; throws LookupError.
  std::size_t column(const std::string& column) const;
};

struct LabelledRun {
  std::string label;
  RunRecord record;
};

struct ScenarioResult {
  Scenario scenario = Scenario::convergence;
  std::vector<Table> tables;  // tables.front() is the scenario's main table
  std::vector<LabelledRun> runs;

  const Table& table(const std::string& name) const;
};

/// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double x);
std::string format_cell(const Cell& c);

std::string to_csv(const Table& table);

/// Per-step log: t, dt, eps, Gamma, residual, disposition.
Table steps_table(const RunRecord& record);
/// The same with a leading run-label column.
Table steps_table(const std::vector<LabelledRun>& runs);

/// One row per run: label, summary fields and joined warnings.
Table summary_table(const std::vector<LabelledRun>& runs);

std::string to_json_text(const RunRecord& record, const ExperimentConfig* cfg = nullptr);
std::string to_json_text(const ScenarioResult& result, const ExperimentConfig& cfg);
RunSummary summary_from_json_text(const std::string& text);

/// Writes one record: CSV is the per-step log, JSON adds the summary,
/// warnings and (when given) the config echo. Throws IoError.
void emit(const RunRecord& record, const std::string& path, OutputFormat format,
          const ExperimentConfig* cfg = nullptr);

/// Writes a scenario. CSV: the main table at `path`, every further table at
/// <stem>.<name>.csv, the run summaries at <stem>.summary.csv and the
/// combined step log at <stem>.steps.csv. JSON: one
/// document holding all of them plus the config echo. Returns the paths.
std::vector<std::string> emit(const ScenarioResult& result, const ExperimentConfig& cfg,
                              const std::string& path, OutputFormat format);

}  // namespace nls::harness
