#include "nls/harness/record.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "nls/errors.hpp"

namespace nls::harness {

using nlohmann::json;

namespace {

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json cell_json(const Cell& c) {
  if (std::holds_alternative<std::monostate>(c)) return nullptr;
  if (const auto* d = std::get_if<double>(&c)) {
    if (std::isfinite(*d)) return *d;
    return format_double(*d);
  }
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  return std::get<std::string>(c);
}

json number_json(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

json table_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (const auto& c : row) r.push_back(cell_json(c));
    rows.push_back(std::move(r));
  }
  return {{"columns", t.columns}, {"rows", std::move(rows)}};
}

json summary_json(const RunSummary& s) {
  return {{"final_time", number_json(s.final_time)},
          {"final_error", number_json(s.final_error)},
          {"max_mass_drift", number_json(s.max_mass_drift)},
          {"max_energy_drift", number_json(s.max_energy_drift)},
          {"runtime_seconds", number_json(s.runtime_seconds)},
          {"accepted", s.accepted},
          {"eps_rejected", s.eps_rejected},
          {"conservation_rejected", s.conservation_rejected},
          {"endpoint_offset", number_json(s.endpoint_offset)}};
}

json record_json(const RunRecord& r) {
  return {{"summary", summary_json(r.summary)},
          {"steps", table_json(steps_table(r))},
          {"warnings", r.warnings}};
}

json config_json(const ExperimentConfig& cfg) {
  json given = json::object();
  for (const auto& [k, v] : cfg.echo) given[k] = v;
  json methods = json::array();
  for (const auto& m : cfg.methods) methods.push_back(m.name());
  return {{"given", std::move(given)},
          {"scenario", to_string(cfg.scenario)},
          {"problem", cfg.problem},
          {"n", cfg.n},
          {"eps", cfg.eps},
          {"phase", cfg.phase == Phase::constant_phase ? "constant" : "varying"},
          {"bc", to_string(cfg.bc)},
          {"m", cfg.nodes()},
          {"methods", std::move(methods)},
          {"dt", cfg.dt},
          {"tol", cfg.tol},
          {"T", cfg.T},
          {"seed", cfg.seed}};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

double summary_number(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  const std::string s = v.get<std::string>();
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  throw ParseError(key, "not a number: " + s);
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw DimensionError("table '" + name + "': row has " + std::to_string(row.size()) +
                         " cells, expected " + std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& c) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == c) return i;
  throw LookupError("table '" + name + "' has no column '" + c + "'");
}

const Table& ScenarioResult::table(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return t;
  throw LookupError("no table named '" + name + "'");
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_cell(const Cell& c) {
  if (std::holds_alternative<std::monostate>(c)) return "";
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return quote_csv(std::get<std::string>(c));
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += quote_csv(table.columns[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

Table steps_table(const RunRecord& record) {
  Table t{"steps", {"t", "dt", "eps", "Gamma", "residual", "disposition"}, {}};
  for (const auto& s : record.steps)
    t.add({s.t, s.dt, s.eps, s.Gamma, s.residual, to_string(s.disposition)});
  return t;
}

Table steps_table(const std::vector<LabelledRun>& runs) {
  Table t{"steps", {"run", "t", "dt", "eps", "Gamma", "residual", "disposition"}, {}};
  for (const auto& r : runs)
    for (const auto& s : r.record.steps)
      t.add({r.label, s.t, s.dt, s.eps, s.Gamma, s.residual, to_string(s.disposition)});
  return t;
}

Table summary_table(const std::vector<LabelledRun>& runs) {
  Table t{"summary",
          {"run", "final_time", "final_error", "max_mass_drift", "max_energy_drift", "runtime",
           "accepted", "eps_rejected", "conservation_rejected", "endpoint_offset", "warnings"},
          {}};
  for (const auto& r : runs) {
    const auto& s = r.record.summary;
    std::string warnings;
    for (const auto& w : r.record.warnings) warnings += (warnings.empty() ? "" : "; ") + w;
    t.add({r.label, s.final_time, s.final_error, s.max_mass_drift, s.max_energy_drift, s.runtime_seconds,
           static_cast<long long>(s.accepted), static_cast<long long>(s.eps_rejected),
           static_cast<long long>(s.conservation_rejected), s.endpoint_offset, warnings});
  }
  return t;
}

std::string to_json_text(const RunRecord& record, const ExperimentConfig* cfg) {
  json j = record_json(record);
  if (cfg) j["config"] = config_json(*cfg);
  return j.dump(2) + "\n";
}

std::string to_json_text(const ScenarioResult& result, const ExperimentConfig& cfg) {
  json tables = json::object();
  for (const auto& t : result.tables) tables[t.name] = table_json(t);
  json runs = json::array();
  for (const auto& r : result.runs) {
    json j = record_json(r.record);
    j["label"] = r.label;
    runs.push_back(std::move(j));
  }
  json doc = {{"scenario", to_string(result.scenario)},
              {"config", config_json(cfg)},
              {"tables", std::move(tables)},
              {"runs", std::move(runs)}};
  return doc.dump(2) + "\n";
}

RunSummary summary_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("", std::string("invalid JSON: ") + e.what());
  }
  const json& s = doc.contains("summary") ? doc.at("summary") : doc;
  RunSummary out;
  out.final_time = summary_number(s, "final_time");
  out.final_error = summary_number(s, "final_error");
  out.max_mass_drift = summary_number(s, "max_mass_drift");
  out.max_energy_drift = summary_number(s, "max_energy_drift");
  out.runtime_seconds = summary_number(s, "runtime_seconds");
  out.accepted = s.at("accepted").get<std::size_t>();
  out.eps_rejected = s.at("eps_rejected").get<std::size_t>();
  out.conservation_rejected = s.at("conservation_rejected").get<std::size_t>();
  out.endpoint_offset = summary_number(s, "endpoint_offset");
  return out;
}

void emit(const RunRecord& record, const std::string& path, OutputFormat format,
          const ExperimentConfig* cfg) {
  if (format == OutputFormat::json) {
    write_file(path, to_json_text(record, cfg));
  } else {
    write_file(path, to_csv(steps_table(record)));
  }
}

std::vector<std::string> emit(const ScenarioResult& result, const ExperimentConfig& cfg,
                              const std::string& path, OutputFormat format) {
  if (format == OutputFormat::json) {
    write_file(path, to_json_text(result, cfg));
    return {path};
  }
  const std::filesystem::path p(path);
  auto sibling = [&](const std::string& name) {
    std::filesystem::path q = p;
    q.replace_filename(p.stem().string() + "." + name + ".csv");
    return q.string();
  };
  std::vector<std::string> written;
  for (std::size_t i = 0; i < result.tables.size(); ++i) {
    const std::string target = i == 0 ? path : sibling(result.tables[i].name);
    write_file(target, to_csv(result.tables[i]));
    written.push_back(target);
  }
  const std::string summary = sibling("summary");
  write_file(summary, to_csv(summary_table(result.runs)));
  written.push_back(summary);
  const std::string steps = sibling("steps");
  write_file(steps, to_csv(steps_table(result.runs)));
  written.push_back(steps);
  return written;
}

}  // namespace nls::harness
