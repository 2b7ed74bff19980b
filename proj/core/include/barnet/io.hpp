#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "barnet/filter.hpp"
#include "barnet/harness.hpp"
#include "barnet/model.hpp"
#include "barnet/optimizer.hpp"

namespace barnet {

// Event matrices travel as CSV: header row of node ids, then one row per
// time bin with 0/1 cells. Models travel as JSON:
//   {"M": int, "A": [row-major], "nu": [...], "meta": {...}}.
// Full format notes live in docs/formats.md.

void write_event_csv(const std::string& path, const EventMatrix& events);
EventMatrix read_event_csv(const std::string& path);
std::string event_csv_string(const EventMatrix& events);
EventMatrix parse_event_csv(const std::string& text);

nlohmann::json model_to_json(const NetworkModel& model);
NetworkModel model_from_json(const nlohmann::json& j);
void write_model_json(const std::string& path, const NetworkModel& model);
NetworkModel read_model_json(const std::string& path);

nlohmann::json fit_report_to_json(const FitReport& report);
void write_fit_report_json(const std::string& path, const FitReport& report);

// Predictive matrix as CSV (header of node ids, one row per bin) plus a JSON
// summary (totals, ESS statistics, reinjection count).
void write_filter_csv(const std::string& path, const FilterOutput& out,
                      const std::vector<std::string>& node_ids);
nlohmann::json filter_summary_json(const FilterOutput& out);

nlohmann::json experiment_spec_to_json(const ExperimentSpec& spec);
// Starts from the named preset and overlays any fields present in j.
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j, const std::string& name,
                                         bool paper_scale = false);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace barnet
