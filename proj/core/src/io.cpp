#include "barnet/io.hpp"

#include <fstream>
#include <sstream>

#include "barnet/errors.hpp"
#include "barnet/ingest.hpp"
#include "barnet/util.hpp"

namespace barnet {

using nlohmann::json;

std::string event_csv_string(const EventMatrix& events) {
  std::ostringstream out;
  for (int i = 0; i < events.nodes(); ++i) {
    if (i) out << ',';
    out << csv_escape(events.node_ids[i]);
  }
  out << '\n';
  for (int t = 0; t < events.bins(); ++t) {
    for (int i = 0; i < events.nodes(); ++i) {
      if (i) out << ',';
      out << static_cast<int>(events.data(i, t));
    }
    out << '\n';
  }
  return out.str();
}

void write_event_csv(const std::string& path, const EventMatrix& events) {
  write_text_file(path, event_csv_string(events));
}

EventMatrix parse_event_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("event CSV: empty input");
  EventMatrix out;
  out.node_ids = split_csv_line(line);
  const int m = static_cast<int>(out.node_ids.size());
  std::vector<std::uint8_t> cells;
  int t = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != m)
      throw DataError("event CSV: row " + std::to_string(t + 2) + " has " +
                      std::to_string(fields.size()) + " cells, expected " + std::to_string(m));
    for (const auto& f : fields) {
      if (f == "0") cells.push_back(0);
      else if (f == "1") cells.push_back(1);
      else throw DataError("event CSV: cell '" + f + "' is not 0/1");
    }
    ++t;
  }
  out.data.resize(m, t);
  for (int tt = 0; tt < t; ++tt)
    for (int i = 0; i < m; ++i) out.data(i, tt) = cells[tt * m + i];
  return out;
}

EventMatrix read_event_csv(const std::string& path) {
  return parse_event_csv(read_text_file(path));
}

json model_to_json(const NetworkModel& model) {
  const int m = model.dim();
  json a = json::array();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a.push_back(model.A(i, j));
  json nu = json::array();
  for (int i = 0; i < m; ++i) nu.push_back(model.nu[i]);
  return json{{"M", m},
              {"A", std::move(a)},
              {"nu", std::move(nu)},
              {"meta", json{{"ball_constrained", model.ball_constrained}}}};
}

NetworkModel model_from_json(const json& j) {
  NetworkModel model;
  const int m = j.at("M").get<int>();
  const auto& a = j.at("A");
  const auto& nu = j.at("nu");
  if (static_cast<int>(a.size()) != m * m) throw DataError("model JSON: A has wrong length");
  if (static_cast<int>(nu.size()) != m) throw DataError("model JSON: nu has wrong length");
  model.A.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) model.A(i, k) = a[i * m + k].get<double>();
  model.nu.resize(m);
  for (int i = 0; i < m; ++i) model.nu[i] = nu[i].get<double>();
  if (j.contains("meta") && j["meta"].contains("ball_constrained"))
    model.ball_constrained = j["meta"]["ball_constrained"].get<bool>();
  model.validate();
  return model;
}

void write_model_json(const std::string& path, const NetworkModel& model) {
  write_json_file(path, model_to_json(model));
}

NetworkModel read_model_json(const std::string& path) {
  json j = json::parse(read_text_file(path));
  return model_from_json(j);
}

json fit_report_to_json(const FitReport& report) {
  json traces = json::array();
  for (const auto& tr : report.objective_trace) traces.push_back(tr);
  const char* family = report.spec.family == LossFamily::Complete    ? "complete"
                       : report.spec.family == LossFamily::Truncated ? "truncated"
                                                                     : "unbiased";
  json p_hat = json::array();
  for (int i = 0; i < report.spec.p_hat.size(); ++i) p_hat.push_back(report.spec.p_hat[i]);
  return json{
      {"model", model_to_json(report.model)},
      {"objective_trace", std::move(traces)},
      {"iterations", report.iterations},
      {"stationarity_gap", report.stationarity_gap},
      {"converged", report.converged},
      {"lambda", report.lambda_resolved},
      {"seed", report.seed},
      {"config",
       json{{"radius", report.config.radius},
            {"max_iters", report.config.max_iters},
            {"tol", report.config.tol},
            {"step_init", report.config.step_init},
            {"backtrack_factor", report.config.backtrack_factor},
            {"init", report.config.init == FitConfig::Init::Zero         ? "zero"
                     : report.config.init == FitConfig::Init::RandomBall ? "random-in-ball"
                                                                         : "warm"},
            {"threads", report.config.threads}}},
      {"loss",
       json{{"family", family},
            {"degree", report.spec.degree},
            {"p_hat", std::move(p_hat)},
            {"include_intercept", report.spec.include_intercept}}}};
}

void write_fit_report_json(const std::string& path, const FitReport& report) {
  write_json_file(path, fit_report_to_json(report));
}

void write_filter_csv(const std::string& path, const FilterOutput& out,
                      const std::vector<std::string>& node_ids) {
  std::ostringstream s;
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    if (i) s << ',';
    s << csv_escape(node_ids[i]);
  }
  s << '\n';
  for (int t = 0; t < out.predictive.cols(); ++t) {
    for (int i = 0; i < out.predictive.rows(); ++i) {
      if (i) s << ',';
      s << format_double(out.predictive(i, t));
    }
    s << '\n';
  }
  write_text_file(path, s.str());
}

json filter_summary_json(const FilterOutput& out) {
  return json{{"expected_event_total", out.expected_event_total},
              {"bins", out.predictive.cols()},
              {"nodes", out.predictive.rows()},
              {"ess_min", out.ess_trace.size() ? out.ess_trace.minCoeff() : 0.0},
              {"ess_mean", out.ess_trace.size() ? out.ess_trace.mean() : 0.0},
              {"reinjections", out.reinjections}};
}

json experiment_spec_to_json(const ExperimentSpec& spec) {
  return json{{"name", spec.name},
              {"M", spec.M},
              {"s", spec.s},
              {"T_grid", spec.T_grid},
              {"p", spec.p},
              {"p_hat_grid", spec.p_hat_grid},
              {"q_grid", spec.q_grid},
              {"trials", spec.trials},
              {"seed", spec.seed},
              {"train_bins", spec.train_bins},
              {"test_bins", spec.test_bins},
              {"n_particles", spec.n_particles},
              {"threads", spec.threads},
              {"fit_tol", spec.fit_tol},
              {"fit_max_iters", spec.fit_max_iters}};
}

ExperimentSpec experiment_spec_from_json(const json& j, const std::string& name,
                                         bool paper_scale) {
  ExperimentSpec spec = ExperimentSpec::preset(name, paper_scale);
  auto set_if = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  set_if("M", spec.M);
  set_if("s", spec.s);
  set_if("T_grid", spec.T_grid);
  set_if("p", spec.p);
  set_if("p_hat_grid", spec.p_hat_grid);
  set_if("q_grid", spec.q_grid);
  set_if("trials", spec.trials);
  set_if("seed", spec.seed);
  set_if("train_bins", spec.train_bins);
  set_if("test_bins", spec.test_bins);
  set_if("n_particles", spec.n_particles);
  set_if("threads", spec.threads);
  set_if("fit_tol", spec.fit_tol);
  set_if("fit_max_iters", spec.fit_max_iters);
  spec.validate();
  return spec;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace barnet
