// SPDX-License-Identifier: Apache-2.0
//
// Command line front end: simulate | estimate | evaluate | sweep |
// export-fig.  Exit codes: 0 success, 1 configuration or runtime failure,
// 2 usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ipred/config.hpp"
#include "ipred/density.hpp"
#include "ipred/harness.hpp"
#include "ipred/predictors.hpp"
#include "ipred/simulator.hpp"

namespace fs = std::filesystem;

namespace {

struct SimulateArgs {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  bool csv = false;
};

struct EstimateArgs {
  std::string series;
  std::int64_t train_len = 0;
  std::string out = "out";
};

struct EvaluateArgs {
  std::string series;
  std::int64_t train_len = 0;
  std::string predictor;
  double gamma0 = 0.0;
  double alpha = 0.0;
  double noise_dbm = -101.0;
  std::string out = "out";
};

struct SweepArgs {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> cache;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
};

struct FigArgs {
  int fig = 2;
  std::string in;
  std::optional<std::string> out;
  double gamma0 = 0.001;
  std::int64_t train_len = 5000;
};

int cmd_simulate(const SimulateArgs& args) {
  ipred::HarnessConfig cfg = ipred::load_config(args.config);
  if (args.seed) cfg.sim.seed = *args.seed;
  const ipred::SimResult res = ipred::run_simulation(cfg.sim);
  fs::create_directories(args.out);
  for (const auto& s : res.series) {
    const fs::path base = fs::path(args.out) / ("ue_" + std::to_string(s.ue));
    ipred::save_series(s, base.string() + ".bin");
    if (args.csv) ipred::export_series_csv(s, base.string() + ".csv");
  }
  std::cout << "wrote " << res.series.size() << " series ("
            << cfg.sim.total_ttis << " TTIs each) to " << args.out << "\n";
  return 0;
}

int cmd_estimate(const EstimateArgs& args) {
  const ipred::IpvSeries series = ipred::load_series(args.series);
  const ipred::SeriesView view = ipred::split_series(series, args.train_len);
  std::vector<double> train_db(view.training_ipv_w.size());
  for (std::size_t i = 0; i < train_db.size(); ++i)
    train_db[i] = ipred::watts_to_db(view.training_ipv_w[i]);
  const ipred::DensityModel model = ipred::DensityModel::fit(train_db);

  fs::create_directories(args.out);
  const fs::path csv_path = fs::path(args.out) / "marginal_density.csv";
  {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot open " + csv_path.string());
    out << "ipv_db,pdf,cdf\n";
    const auto& m = model.marginal();
    char line[128];
    for (std::size_t j = 0; j < m.grid.size(); ++j) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", m.grid[j],
                    m.pdf[j], m.cdf[j]);
      out << line;
    }
  }
  const nlohmann::json summary{
      {"series", args.series},
      {"training_len", args.train_len},
      {"bandwidth_marginal_db2", model.marginal().bandwidth},
      {"bandwidth_joint_x_db2", model.joint().bandwidth_x},
      {"bandwidth_joint_y_db2", model.joint().bandwidth_y},
      {"grid_lo_db", model.marginal().grid.front()},
      {"grid_hi_db", model.marginal().grid.back()},
      {"marginal_mean_w", model.marginal_mean_w()},
  };
  const fs::path sum_path = fs::path(args.out) / "estimate_summary.json";
  std::ofstream sum(sum_path);
  if (!sum) throw std::runtime_error("cannot open " + sum_path.string());
  sum << summary.dump(2) << "\n";
  std::cout << "wrote " << csv_path.string() << " and " << sum_path.string()
            << "\n";
  return 0;
}

int cmd_evaluate(const EvaluateArgs& args) {
  const ipred::IpvSeries series = ipred::load_series(args.series);
  const ipred::SeriesView view = ipred::split_series(series, args.train_len);

  const ipred::PredictorKind kind =
      ipred::predictor_from_string(args.predictor);
  std::shared_ptr<const ipred::DensityModel> model;
  if (kind != ipred::PredictorKind::kLpp) {
    std::vector<double> train_db(view.training_ipv_w.size());
    for (std::size_t i = 0; i < train_db.size(); ++i)
      train_db[i] = ipred::watts_to_db(view.training_ipv_w[i]);
    model = std::make_shared<const ipred::DensityModel>(
        ipred::DensityModel::fit(train_db));
  }
  auto pred =
      ipred::make_predictor({kind, args.gamma0, args.alpha}, std::move(model));
  const double noise_w = std::pow(10.0, (args.noise_dbm - 30.0) / 10.0);
  const ipred::EvalMetrics m = ipred::evaluate(
      *pred, view.context_ipv_w, view.eval_ipv_w, view.eval_signal_w, noise_w);

  fs::create_directories(args.out);
  const nlohmann::json result{
      {"series", args.series},       {"predictor", args.predictor},
      {"training_len", args.train_len}, {"gamma0", args.gamma0},
      {"alpha", args.alpha},         {"noise_dbm", args.noise_dbm},
      {"theta", m.theta},            {"mean_se", m.mean_se},
      {"n_eval", m.n_eval},
  };
  const fs::path out_path = fs::path(args.out) / "evaluate.json";
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open " + out_path.string());
  out << result.dump(2) << "\n";
  std::cout << "predictor=" << args.predictor << " theta=" << m.theta
            << " mean_se=" << m.mean_se << " n_eval=" << m.n_eval << "\n";
  return 0;
}

int cmd_sweep(const SweepArgs& args) {
  ipred::HarnessConfig cfg = ipred::load_config(args.config);
  if (args.seed) cfg.sim.seed = *args.seed;
  if (args.cache) cfg.cache_dir = *args.cache;
  if (args.out) cfg.out_dir = *args.out;
  if (args.threads) cfg.threads = *args.threads;
  cfg.validate();

  const ipred::ExperimentResult res = ipred::run_experiment(cfg);
  ipred::write_reports(res, cfg.out_dir);
  std::cout << "wrote " << res.rows.size() << " rows to " << cfg.out_dir
            << "\n";
  return 0;
}

int cmd_fig(const FigArgs& args) {
  const std::string path =
      ipred::export_fig(args.fig, args.in, args.out.value_or(args.in),
                        args.gamma0, args.train_len);
  std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cell interference simulation and prediction toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand(
      "simulate", "Run one simulation and store the recorded series");
  sim->add_option("--config", sim_args.config, "JSON configuration file")
      ->required();
  sim->add_option("--out", sim_args.out, "Output directory (default: out)");
  sim->add_option("--seed", sim_args.seed, "Override the configured seed");
  sim->add_flag("--csv", sim_args.csv, "Also export each series as CSV");

  EstimateArgs est_args;
  auto* est = app.add_subcommand(
      "estimate", "Fit the density model of a recorded series");
  est->add_option("--series", est_args.series, "Series file (.bin)")
      ->required();
  est->add_option("--train-len", est_args.train_len,
                  "Training prefix length in TTIs")
      ->required();
  est->add_option("--out", est_args.out, "Output directory (default: out)");

  EvaluateArgs ev_args;
  auto* ev = app.add_subcommand(
      "evaluate", "Evaluate one predictor on a recorded series");
  ev->add_option("--series", ev_args.series, "Series file (.bin)")->required();
  ev->add_option("--train-len", ev_args.train_len,
                 "Training prefix length in TTIs")
      ->required();
  ev->add_option("--predictor", ev_args.predictor,
                 "mq_cond | mq_marg | mp_cond | mp_marg | lpp")
      ->required();
  ev->add_option("--gamma0", ev_args.gamma0,
                 "Target exceedance rate (mq_* predictors)");
  ev->add_option("--alpha", ev_args.alpha, "Smoothing factor (lpp)");
  ev->add_option("--noise-dbm", ev_args.noise_dbm,
                 "Noise power in dBm (default: -101)");
  ev->add_option("--out", ev_args.out, "Output directory (default: out)");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand(
      "sweep", "Run the full evaluation grid and write reports");
  sweep->add_option("--config", sweep_args.config, "JSON configuration file")
      ->required();
  sweep->add_option("--out", sweep_args.out, "Override the output directory");
  sweep->add_option("--cache", sweep_args.cache,
                    "Override the series cache directory");
  sweep->add_option("--threads", sweep_args.threads,
                    "Worker threads (0 = hardware concurrency)");
  sweep->add_option("--seed", sweep_args.seed, "Override the configured seed");

  FigArgs fig_args;
  auto* fig = app.add_subcommand(
      "export-fig", "Aggregate a finished sweep into a plot-ready CSV");
  fig->add_option("--fig", fig_args.fig, "Figure id (2-5)")
      ->required()
      ->check(CLI::Range(2, 5));
  fig->add_option("--in", fig_args.in, "Directory containing reports.json")
      ->required();
  fig->add_option("--out", fig_args.out,
                  "Output directory (default: the --in directory)");
  fig->add_option("--gamma0", fig_args.gamma0,
                  "Target rate selecting MQ rows (default: 0.001)");
  fig->add_option("--train-len", fig_args.train_len,
                  "Training length selecting rows (default: 5000)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n"
              << "Run with --help for usage.\n";
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (est->parsed()) return cmd_estimate(est_args);
    if (ev->parsed()) return cmd_evaluate(ev_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (fig->parsed()) return cmd_fig(fig_args);
    std::cerr << "usage error: no subcommand\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
