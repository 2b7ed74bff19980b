// barnet command line tool: simulate | corrupt | ingest | fit | filter | experiment.
// Subcommands compose through files only (CSV matrices, JSON models/configs)
// and every run echoes its fully resolved configuration into --out.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "barnet/errors.hpp"
#include "barnet/filter.hpp"
#include "barnet/harness.hpp"
#include "barnet/ingest.hpp"
#include "barnet/io.hpp"
#include "barnet/loss.hpp"
#include "barnet/model.hpp"
#include "barnet/optimizer.hpp"
#include "barnet/util.hpp"

#ifndef BARNET_BUILD_HASH
#define BARNET_BUILD_HASH "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace barnet;

namespace {

std::string out_path(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

void prepare_out(const std::string& dir) { fs::create_directories(dir); }

// "1w", "7d", "24h", "900s" or a bare number of seconds.
std::int64_t parse_duration(const std::string& text) {
  if (text.empty()) throw ConfigError("empty duration");
  char unit = text.back();
  std::string digits = text;
  std::int64_t mult = 1;
  if (unit == 'w' || unit == 'd' || unit == 'h' || unit == 's') {
    digits = text.substr(0, text.size() - 1);
    mult = unit == 'w' ? kSecondsPerWeek : unit == 'd' ? kSecondsPerDay : unit == 'h' ? 3600 : 1;
  }
  size_t pos = 0;
  const std::int64_t value = std::stoll(digits, &pos);
  if (pos != digits.size() || value <= 0) throw ConfigError("bad duration '" + text + "'");
  return value * mult;
}

// Scalar value or a path to a CSV holding one probability per node.
Eigen::VectorXd parse_p_hat(const std::string& text, int nodes) {
  try {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size()) {
      Eigen::VectorXd out(1);
      out << v;
      return resolve_p_hat(out, nodes);
    }
  } catch (const std::invalid_argument&) {
  }
  const std::string content = read_text_file(text);
  std::vector<double> values;
  std::string cell;
  for (char c : content) {
    if (c == ',' || c == '\n' || c == '\r') {
      if (!cell.empty()) values.push_back(std::stod(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (!cell.empty()) values.push_back(std::stod(cell));
  Eigen::VectorXd out(static_cast<int>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out[static_cast<int>(i)] = values[i];
  return resolve_p_hat(out, nodes);
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

struct SimulateOpts {
  std::string model_path, out = "out";
  int T = 100, burn_in = 0;
  std::uint64_t seed = 0;
};

int run_simulate(const SimulateOpts& o) {
  prepare_out(o.out);
  NetworkModel model = read_model_json(o.model_path);
  EventMatrix x = simulate_bar(model, o.T, o.seed, Eigen::VectorXd(), o.burn_in);
  write_event_csv(out_path(o.out, "events.csv"), x);
  write_json_file(out_path(o.out, "config.json"),
                  json{{"command", "simulate"},
                       {"model", o.model_path},
                       {"T", o.T},
                       {"burn_in", o.burn_in},
                       {"seed", o.seed}});
  return 0;
}

struct CorruptOpts {
  std::string input, p_text = "1.0", out = "out";
  std::uint64_t seed = 0;
};

int run_corrupt(const CorruptOpts& o) {
  prepare_out(o.out);
  EventMatrix x = read_event_csv(o.input);
  Eigen::VectorXd p = parse_p_hat(o.p_text, x.nodes());
  MissingnessSpec spec;
  spec.p = p;
  spec.p_hat = p;
  auto [z, w] = apply_missingness(x, spec, o.seed);
  write_event_csv(out_path(o.out, "observed.csv"), z);
  write_event_csv(out_path(o.out, "mask.csv"), w);
  write_json_file(out_path(o.out, "config.json"), json{{"command", "corrupt"},
                                                       {"input", o.input},
                                                       {"p", vector_json(p)},
                                                       {"seed", o.seed}});
  return 0;
}

struct IngestOpts {
  std::string input, out = "out";
  std::string type_filter;
  std::string bin_width = "1w";
  std::string origin;  // datetime string; default = week start of first record
  int top_k = 0;
  std::vector<std::string> nodes;
  int train_bins = 0, test_bins = 0;
  double mask_p = 1.0;
  std::uint64_t seed = 0;
  std::string date_col = "date", node_col = "community_area", type_col = "primary_type";
};

int run_ingest(const IngestOpts& o) {
  prepare_out(o.out);
  IngestConfig cfg;
  cfg.date_column = o.date_col;
  cfg.node_column = o.node_col;
  cfg.type_column = o.type_col;
  cfg.type_filter = o.type_filter;
  IngestResult parsed = read_incident_csv(o.input, cfg);

  json rejects = json::array();
  for (const auto& r : parsed.rejects) rejects.push_back({{"line", r.line}, {"reason", r.reason}});
  write_json_file(out_path(o.out, "rejects.json"),
                  json{{"total_rows", parsed.total_rows},
                       {"accepted", parsed.records.size()},
                       {"filtered_out", parsed.filtered_out},
                       {"rejects", std::move(rejects)}});
  if (parsed.records.empty()) throw DataError("no usable records after parsing/filtering");

  std::vector<std::string> nodes = o.nodes;
  if (nodes.empty()) {
    if (o.top_k <= 0) throw ConfigError("ingest: give --top-k or --nodes");
    nodes = top_k_nodes(parsed.records, o.top_k);
  }

  const std::int64_t width = parse_duration(o.bin_width);
  std::int64_t origin = 0;
  if (!o.origin.empty()) {
    if (!parse_datetime(o.origin, cfg.date_formats, origin))
      throw ConfigError("ingest: cannot parse --origin '" + o.origin + "'");
  } else {
    std::int64_t first = std::numeric_limits<std::int64_t>::max();
    for (const auto& r : parsed.records) first = std::min(first, r.timestamp);
    origin = week_origin(first);
  }

  BinResult binned = bin_events(parsed.records, width, origin, nodes);
  write_event_csv(out_path(o.out, "events.csv"), binned.events);
  write_json_file(out_path(o.out, "summary.json"),
                  json{{"nodes", nodes},
                       {"bins", binned.events.bins()},
                       {"bin_width_seconds", width},
                       {"origin_epoch", origin},
                       {"binned_records", binned.binned_records},
                       {"out_of_span", binned.out_of_span},
                       {"other_nodes", binned.other_nodes}});

  if (o.train_bins > 0) {
    SplitSpec split;
    split.train_bins = o.train_bins;
    split.test_bins = o.test_bins > 0 ? o.test_bins : binned.events.bins() - o.train_bins;
    split.mask_p = o.mask_p;
    split.seed = o.seed;
    SplitResult parts = split_and_mask(binned.events, split);
    write_event_csv(out_path(o.out, "x_train.csv"), parts.x_train);
    write_event_csv(out_path(o.out, "z_train.csv"), parts.z_train);
    write_event_csv(out_path(o.out, "x_test.csv"), parts.x_test);
    write_event_csv(out_path(o.out, "w_train.csv"), parts.w_train);
  }

  write_json_file(out_path(o.out, "config.json"),
                  json{{"command", "ingest"},
                       {"input", o.input},
                       {"type_filter", o.type_filter},
                       {"bin_width", o.bin_width},
                       {"origin_epoch", origin},
                       {"top_k", o.top_k},
                       {"nodes", nodes},
                       {"train_bins", o.train_bins},
                       {"test_bins", o.test_bins},
                       {"mask_p", o.mask_p},
                       {"seed", o.seed},
                       {"columns",
                        json{{"date", o.date_col}, {"node", o.node_col}, {"type", o.type_col}}}});
  return 0;
}

struct FitOpts {
  std::string input, out = "out";
  std::string loss = "unbiased";
  int q = 2;
  std::string p_hat = "1.0";
  std::string lambda = "auto";
  double lambda_theory = std::nan("");
  double radius = 1.0;
  int max_iters = 10000;
  double tol = 1e-8;
  double step_init = 1.0;
  double backtrack = 0.5;
  std::string init = "random";
  std::string warm_model;
  bool intercept = false;
  std::uint64_t seed = 0;
  int threads = 0;
};

int run_fit(const FitOpts& o) {
  prepare_out(o.out);
  EventMatrix data = read_event_csv(o.input);

  LossSpec spec;
  if (o.loss == "complete") spec.family = LossFamily::Complete;
  else if (o.loss == "truncated") spec.family = LossFamily::Truncated;
  else if (o.loss == "unbiased") spec.family = LossFamily::Unbiased;
  else throw ConfigError("fit: unknown loss '" + o.loss + "'");
  spec.degree = o.q;
  spec.include_intercept = o.intercept;
  if (spec.family == LossFamily::Unbiased) spec.p_hat = parse_p_hat(o.p_hat, data.nodes());

  FitConfig cfg;
  cfg.radius = o.radius;
  cfg.max_iters = o.max_iters;
  cfg.tol = o.tol;
  cfg.step_init = o.step_init;
  cfg.backtrack_factor = o.backtrack;
  cfg.seed = o.seed;
  cfg.threads = o.threads > 0 ? o.threads : hardware_threads();
  if (!o.warm_model.empty()) {
    NetworkModel warm = read_model_json(o.warm_model);
    cfg.init = FitConfig::Init::Warm;
    cfg.warm_A = warm.A;
    cfg.warm_nu = warm.nu;
  } else if (o.init == "zero") {
    cfg.init = FitConfig::Init::Zero;
  } else if (o.init == "random") {
    cfg.init = FitConfig::Init::RandomBall;
  } else {
    throw ConfigError("fit: unknown init '" + o.init + "'");
  }

  if (!std::isnan(o.lambda_theory)) {
    // lambda = C * ( log(M T) / (sqrt(T) (p pi - 1)) + (p pi)^-q )
    const double p_min =
        spec.family == LossFamily::Unbiased ? resolve_p_hat(spec.p_hat, data.nodes()).minCoeff()
                                            : 1.0;
    if (p_min * M_PI <= 1.0)
      throw ConfigError("fit: --lambda-theory needs min(p_hat) > 1/pi");
    const double T = data.bins();
    const int q_eff = spec.family == LossFamily::Complete ? 8 : spec.effective_degree();
    cfg.lambda = o.lambda_theory * (std::log(data.nodes() * T) / (std::sqrt(T) * (p_min * M_PI - 1.0)) +
                                    std::pow(p_min * M_PI, -q_eff));
  } else if (o.lambda == "auto") {
    cfg.lambda = -1.0;
  } else {
    cfg.lambda = std::stod(o.lambda);
    if (cfg.lambda < 0) throw ConfigError("fit: lambda must be >= 0");
  }

  FitReport report = fit_network(spec, data, cfg);
  write_model_json(out_path(o.out, "model.json"), report.model);
  write_fit_report_json(out_path(o.out, "fit_report.json"), report);
  write_json_file(out_path(o.out, "config.json"),
                  json{{"command", "fit"},
                       {"input", o.input},
                       {"loss", o.loss},
                       {"q", o.q},
                       {"p_hat", o.p_hat},
                       {"lambda_resolved", report.lambda_resolved},
                       {"radius", o.radius},
                       {"max_iters", o.max_iters},
                       {"tol", o.tol},
                       {"step_init", o.step_init},
                       {"backtrack", o.backtrack},
                       {"init", o.init},
                       {"intercept", o.intercept},
                       {"seed", o.seed},
                       {"threads", cfg.threads}});
  return 0;
}

struct FilterOpts {
  std::string input, model_path, out = "out";
  std::string p_hat = "1.0";
  int particles = 1000;
  double resample_threshold = 0.5;
  std::string x0_file;
  std::uint64_t seed = 0;
};

int run_filter_cmd(const FilterOpts& o) {
  prepare_out(o.out);
  EventMatrix z = read_event_csv(o.input);
  NetworkModel model = read_model_json(o.model_path);

  FilterConfig cfg;
  cfg.n_particles = o.particles;
  cfg.resample_threshold = o.resample_threshold;
  cfg.seed = o.seed;
  Eigen::VectorXd p = parse_p_hat(o.p_hat, z.nodes());
  cfg.obs.p = p;
  cfg.obs.p_hat = p;
  if (!o.x0_file.empty()) {
    EventMatrix x0 = read_event_csv(o.x0_file);
    if (x0.bins() < 1 || x0.nodes() != z.nodes())
      throw ConfigError("filter: x0 file must hold one bin for the same nodes");
    cfg.x0 = x0.data.col(x0.bins() - 1).cast<double>();
  }

  FilterOutput out = filter_predict(model, z, cfg);
  write_filter_csv(out_path(o.out, "predictive.csv"), out, z.node_ids);
  write_json_file(out_path(o.out, "summary.json"), filter_summary_json(out));
  write_json_file(out_path(o.out, "config.json"),
                  json{{"command", "filter"},
                       {"input", o.input},
                       {"model", o.model_path},
                       {"p_hat", vector_json(p)},
                       {"particles", o.particles},
                       {"resample_threshold", o.resample_threshold},
                       {"x0", o.x0_file},
                       {"seed", o.seed}});
  return 0;
}

struct ExperimentOpts {
  std::string name, config_path, out = "out";
  bool paper_scale = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

int run_experiment_cmd(const ExperimentOpts& o) {
  prepare_out(o.out);
  json overrides = json::object();
  if (!o.config_path.empty()) overrides = json::parse(read_text_file(o.config_path));
  ExperimentSpec spec = experiment_spec_from_json(overrides, o.name, o.paper_scale);
  if (o.seed) spec.seed = *o.seed;
  if (o.threads) spec.threads = *o.threads;

  ResultTable table = run_experiment(spec);
  write_text_file(out_path(o.out, "raw.csv"), table.raw_csv());
  write_text_file(out_path(o.out, "summary.csv"), table.summary_csv());
  write_json_file(out_path(o.out, "config-echo.json"), experiment_spec_to_json(spec));

  std::string log;
  for (const auto& line : table.log) log += line + "\n";
  log += "experiment=" + spec.name + " raw_rows=" + std::to_string(table.raw.size()) +
         " summary_rows=" + std::to_string(table.summary.size()) + "\n";
  write_text_file(out_path(o.out, "log.txt"), log);

  write_text_file(out_path(o.out, "plot.gp"),
                  "# gnuplot stub: plot medians from summary.csv\n"
                  "set datafile separator ','\n"
                  "set key autotitle columnhead\n"
                  "set logscale y\n"
                  "# adjust the using/filter clauses to the experiment at hand\n"
                  "plot 'summary.csv' using 3:9 with linespoints\n");

  if (spec.name == "filter_eval") {
    FilterTrajectories tr = filter_eval_trajectories(spec, 0);
    std::string csv = "bin,proposed,naive_scaled,actual_smoothed,observed_smoothed\n";
    for (int t = 0; t < tr.proposed.size(); ++t) {
      csv += std::to_string(t) + ',' + format_double(tr.proposed[t]) + ',' +
             format_double(tr.naive_scaled[t]) + ',' + format_double(tr.actual_smoothed[t]) +
             ',' + format_double(tr.observed_smoothed[t]) + '\n';
    }
    write_text_file(out_path(o.out, "trajectories.csv"), csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"estimation for autoregressive binary event networks under partial observation"};
  app.set_version_flag("--version", std::string("barnet 0.1.0 (") + BARNET_BUILD_HASH + ")");
  app.require_subcommand(1);

  SimulateOpts sim;
  auto* c_sim = app.add_subcommand("simulate", "draw an event matrix from a model");
  c_sim->add_option("--model", sim.model_path, "model JSON")->required();
  c_sim->add_option("--T", sim.T, "number of time bins")->required();
  c_sim->add_option("--burn-in", sim.burn_in, "discarded warmup steps");
  c_sim->add_option("--seed", sim.seed, "RNG seed");
  c_sim->add_option("--out", sim.out, "output directory");

  CorruptOpts cor;
  auto* c_cor = app.add_subcommand("corrupt", "thin an event matrix with Bernoulli masks");
  c_cor->add_option("input", cor.input, "event CSV")->required();
  c_cor->add_option("--p", cor.p_text, "observation probability (scalar or per-node CSV)");
  c_cor->add_option("--seed", cor.seed, "RNG seed");
  c_cor->add_option("--out", cor.out, "output directory");

  IngestOpts ing;
  auto* c_ing = app.add_subcommand("ingest", "bin raw incident records into an event matrix");
  c_ing->add_option("input", ing.input, "incident CSV")->required();
  c_ing->add_option("--type-filter", ing.type_filter, "keep records of this type only");
  c_ing->add_option("--bin-width", ing.bin_width, "bin width (e.g. 1w, 7d, 3600s)");
  c_ing->add_option("--origin", ing.origin, "bin origin datetime (default: week start of first record)");
  c_ing->add_option("--top-k", ing.top_k, "select the k most active nodes");
  c_ing->add_option("--nodes", ing.nodes, "explicit node keys")->delimiter(',');
  c_ing->add_option("--train-bins", ing.train_bins, "split: training bins");
  c_ing->add_option("--test-bins", ing.test_bins, "split: test bins (default remainder)");
  c_ing->add_option("--mask-p", ing.mask_p, "thinning level for the train split");
  c_ing->add_option("--seed", ing.seed, "RNG seed for the mask");
  c_ing->add_option("--date-col", ing.date_col, "date column name");
  c_ing->add_option("--node-col", ing.node_col, "node column name");
  c_ing->add_option("--type-col", ing.type_col, "type column name");
  c_ing->add_option("--out", ing.out, "output directory");

  FitOpts fit;
  auto* c_fit = app.add_subcommand("fit", "estimate the network from an event matrix");
  c_fit->add_option("input", fit.input, "event CSV (observed)")->required();
  c_fit->add_option("--loss", fit.loss, "complete | truncated | unbiased");
  c_fit->add_option("--q", fit.q, "truncation degree (even)");
  c_fit->add_option("--p-hat", fit.p_hat, "observation estimate (scalar or per-node CSV)");
  c_fit->add_option("--lambda", fit.lambda, "l1 penalty, or 'auto' = 0.75/sqrt(T_eff)");
  c_fit->add_option("--lambda-theory", fit.lambda_theory,
                    "scale C for the theory-shaped lambda (overrides --lambda)");
  c_fit->add_option("--radius", fit.radius, "l1 ball radius per row");
  c_fit->add_option("--max-iters", fit.max_iters, "iteration cap per row");
  c_fit->add_option("--tol", fit.tol, "relative objective-change tolerance");
  c_fit->add_option("--step-init", fit.step_init, "initial step size");
  c_fit->add_option("--backtrack", fit.backtrack, "backtracking factor in (0,1)");
  c_fit->add_option("--init", fit.init, "zero | random");
  c_fit->add_option("--warm-model", fit.warm_model, "model JSON to warm start from");
  c_fit->add_flag("--intercept", fit.intercept, "learn per-node bias terms");
  c_fit->add_option("--seed", fit.seed, "RNG seed (random init)");
  c_fit->add_option("--threads", fit.threads, "worker cap (0 = cores)");
  c_fit->add_option("--out", fit.out, "output directory");

  FilterOpts flt;
  auto* c_flt = app.add_subcommand("filter", "one-step-ahead event probabilities");
  c_flt->add_option("input", flt.input, "observed event CSV")->required();
  c_flt->add_option("--model", flt.model_path, "model JSON")->required();
  c_flt->add_option("--p-hat", flt.p_hat, "observation model (scalar or per-node CSV)");
  c_flt->add_option("--particles", flt.particles, "particle count");
  c_flt->add_option("--resample-threshold", flt.resample_threshold, "ESS/N trigger");
  c_flt->add_option("--x0-file", flt.x0_file, "event CSV whose last bin seeds the state");
  c_flt->add_option("--seed", flt.seed, "RNG seed");
  c_flt->add_option("--out", flt.out, "output directory");

  ExperimentOpts exp;
  auto* c_exp = app.add_subcommand("experiment", "reproduce the simulation studies");
  auto* c_run = c_exp->add_subcommand("run", "run a named experiment");
  c_run->add_option("name", exp.name,
                    "mse_vs_T | robustness | truncation | holdout | filter_eval")
      ->required();
  c_run->add_option("--config", exp.config_path, "JSON overrides for the preset");
  c_run->add_flag("--paper-scale", exp.paper_scale, "published grid sizes instead of desk scale");
  std::uint64_t seed_opt = 0;
  auto* seed_flag = c_run->add_option("--seed", seed_opt, "master seed");
  int threads_opt = 0;
  auto* threads_flag = c_run->add_option("--threads", threads_opt, "worker cap (0 = cores)");
  c_run->add_option("--out", exp.out, "output directory");
  c_exp->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_sim) return run_simulate(sim);
    if (*c_cor) return run_corrupt(cor);
    if (*c_ing) return run_ingest(ing);
    if (*c_fit) return run_fit(fit);
    if (*c_flt) return run_filter_cmd(flt);
    if (*c_exp) {
      if (*seed_flag) exp.seed = seed_opt;
      if (*threads_flag) exp.threads = threads_opt;
      return run_experiment_cmd(exp);
    }
  } catch (const ConfigError& e) {
    std::cerr << "barnet: configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "barnet: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
