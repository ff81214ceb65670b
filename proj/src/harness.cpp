// SPDX-License-Identifier: Apache-2.0

#include "ipred/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <thread>

#include "ipred/hash.hpp"

#ifndef IPRED_GIT_REV
#define IPRED_GIT_REV "unknown"
#endif

namespace fs = std::filesystem;

namespace ipred {

EvalMetrics evaluate(Predictor& pred, double context_w,
                     std::span<const double> ipv_w,
                     std::span<const double> signal_w, double noise_w) {
  if (ipv_w.size() != signal_w.size())
    throw std::invalid_argument("evaluate: ipv/signal size mismatch");
  if (ipv_w.empty())
    throw std::invalid_argument("evaluate: no transitions to evaluate");
  if (!(noise_w > 0.0))
    throw std::invalid_argument("evaluate: noise power must be positive");

  pred.reset();
  double observed = context_w;
  std::int64_t fails = 0;
  double se_sum = 0.0;
  for (std::size_t i = 0; i < ipv_w.size(); ++i) {
    const double predicted = pred.predict_next_w(observed);
    if (!(predicted > 0.0) || !std::isfinite(predicted))
      throw std::runtime_error("evaluate: prediction not positive finite");
    if (predicted < ipv_w[i]) {
      ++fails;  // under-prediction: the scheduled rate would not decode
    } else {
      se_sum += std::log2(1.0 + signal_w[i] / (predicted + noise_w));
    }
    observed = ipv_w[i];
  }
  EvalMetrics m;
  m.n_eval = static_cast<std::int64_t>(ipv_w.size());
  m.theta = static_cast<double>(fails) / static_cast<double>(m.n_eval);
  m.mean_se = se_sum / static_cast<double>(m.n_eval);
  return m;
}

EvalMetrics evaluate_series(Predictor& pred, std::span<const double> ipv_w,
                            std::span<const double> signal_w, double noise_w) {
  if (ipv_w.size() < 2)
    throw std::invalid_argument("evaluate_series: need at least 2 values");
  if (ipv_w.size() != signal_w.size())
    throw std::invalid_argument("evaluate_series: ipv/signal size mismatch");
  return evaluate(pred, ipv_w.front(), ipv_w.subspan(1), signal_w.subspan(1),
                  noise_w);
}

std::vector<IpvSeries> cached_series(const SimConfig& cfg,
                                     const std::string& cache_dir) {
  const std::uint64_t chash = config_hash(cfg);
  const fs::path dir =
      fs::path(cache_dir) / (to_hex(chash) + "_" + to_hex(cfg.seed));

  const ScenarioDraw draw = make_scenario(cfg);
  const std::vector<int> monitored = resolve_monitored(cfg, draw.scenario);

  auto try_load = [&]() -> std::vector<IpvSeries> {
    std::vector<IpvSeries> out;
    out.reserve(monitored.size());
    for (int ue : monitored) {
      const fs::path file = dir / ("ue_" + std::to_string(ue) + ".bin");
      IpvSeries s = load_series(file.string());
      if (s.seed != cfg.seed || s.config_hash != chash || s.ue != ue ||
          s.n_ttis() != cfg.total_ttis)
        throw std::runtime_error("cache entry " + file.string() +
                                 " does not match the requested run");
      out.push_back(std::move(s));
    }
    return out;
  };

  if (fs::exists(dir)) {
    try {
      return try_load();
    } catch (const std::exception& e) {
      std::cerr << "warning: discarding cache entry: " << e.what() << "\n";
    }
  }

  SimResult res = run_simulation(cfg);
  fs::create_directories(dir);
  for (const auto& s : res.series) {
    const fs::path file = dir / ("ue_" + std::to_string(s.ue) + ".bin");
    save_series(s, file.string());
  }
  return std::move(res.series);
}

namespace {

struct Task {
  SchedulerKind scheduler = SchedulerKind::kRoundRobin;
  int drop = 0;
};

struct TaskOutput {
  std::vector<EvalRow> rows;
  std::vector<EvalRow> alpha_rows;
};

TaskOutput run_task(const HarnessConfig& cfg, const Task& task) {
  SimConfig sc = cfg.sim;
  sc.scheduler = task.scheduler;
  sc.seed = derive_seed(cfg.sim.seed, stream_tag::kDrop,
                        std::uint64_t(task.drop));

  const std::vector<IpvSeries> series = cached_series(sc, cfg.cache_dir);
  const double noise_w = cfg.sim.noise_power_w();

  TaskOutput out;
  for (const std::int64_t len : cfg.sweep.training_lens) {
    for (const auto& s : series) {
      const SeriesView view = split_series(s, len);
      std::vector<double> train_db(view.training_ipv_w.size());
      for (std::size_t i = 0; i < train_db.size(); ++i)
        train_db[i] = watts_to_db(view.training_ipv_w[i]);
      const auto model =
          std::make_shared<const DensityModel>(DensityModel::fit(train_db));

      auto run_one = [&](const PredictorSpec& spec) {
        auto pred = make_predictor(spec, model);
        return evaluate(*pred, view.context_ipv_w, view.eval_ipv_w,
                        view.eval_signal_w, noise_w);
      };
      auto base_row = [&](const std::string& name) {
        EvalRow r;
        r.predictor = name;
        r.scheduler = task.scheduler;
        r.training_len = len;
        r.drop = task.drop;
        r.ue = s.ue;
        return r;
      };

      for (const auto& name : cfg.sweep.predictors) {
        const PredictorKind kind = predictor_from_string(name);
        if (kind == PredictorKind::kMqCond || kind == PredictorKind::kMqMarg) {
          for (const double g : cfg.sweep.gamma0s) {
            const EvalMetrics m = run_one({kind, g, 0.0});
            EvalRow r = base_row(name);
            r.gamma0 = g;
            r.theta = m.theta;
            r.mean_se = m.mean_se;
            r.n_eval = m.n_eval;
            out.rows.push_back(std::move(r));
          }
        } else if (kind == PredictorKind::kMpCond ||
                   kind == PredictorKind::kMpMarg) {
          const EvalMetrics m = run_one({kind, 0.0, 0.0});
          EvalRow r = base_row(name);
          r.theta = m.theta;
          r.mean_se = m.mean_se;
          r.n_eval = m.n_eval;
          out.rows.push_back(std::move(r));
        } else {
          // LPP: evaluate the whole alpha sweep; the headline row keeps the
          // alpha with the lowest failure rate (ties: higher SE, then
          // smaller alpha).
          bool have_best = false;
          EvalRow best;
          for (const double a : cfg.sweep.lpp_alphas) {
            const EvalMetrics m = run_one({kind, 0.0, a});
            EvalRow r = base_row(name);
            r.lpp_alpha = a;
            r.theta = m.theta;
            r.mean_se = m.mean_se;
            r.n_eval = m.n_eval;
            out.alpha_rows.push_back(r);
            const auto key = std::make_tuple(m.theta, -m.mean_se, a);
            if (!have_best ||
                key < std::make_tuple(best.theta, -best.mean_se,
                                      *best.lpp_alpha)) {
              best = std::move(r);
              have_best = true;
            }
          }
          out.rows.push_back(std::move(best));
        }
      }
    }
  }
  return out;
}

// Canonical row order: matches the CSV column order so reports read
// naturally and reruns are byte-identical.
bool row_less(const EvalRow& a, const EvalRow& b) {
  auto key = [](const EvalRow& r) {
    return std::make_tuple(r.predictor, to_string(r.scheduler), r.training_len,
                           r.gamma0.value_or(-1.0), r.drop, r.ue,
                           r.lpp_alpha.value_or(-1.0));
  };
  return key(a) < key(b);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json row_to_json(const EvalRow& r) {
  nlohmann::json j{
      {"predictor", r.predictor},
      {"scheduler", to_string(r.scheduler)},
      {"training_len", r.training_len},
      {"drop", r.drop},
      {"ue", r.ue},
      {"theta", r.theta},
      {"mean_se", r.mean_se},
      {"n_eval", r.n_eval},
  };
  j["gamma0"] = r.gamma0 ? nlohmann::json(*r.gamma0) : nlohmann::json();
  j["lpp_alpha"] =
      r.lpp_alpha ? nlohmann::json(*r.lpp_alpha) : nlohmann::json();
  return j;
}

EvalRow row_from_json(const nlohmann::json& j) {
  EvalRow r;
  j.at("predictor").get_to(r.predictor);
  r.scheduler = scheduler_from_string(j.at("scheduler").get<std::string>());
  j.at("training_len").get_to(r.training_len);
  if (!j.at("gamma0").is_null()) r.gamma0 = j.at("gamma0").get<double>();
  j.at("drop").get_to(r.drop);
  j.at("ue").get_to(r.ue);
  j.at("theta").get_to(r.theta);
  j.at("mean_se").get_to(r.mean_se);
  j.at("n_eval").get_to(r.n_eval);
  if (!j.at("lpp_alpha").is_null())
    r.lpp_alpha = j.at("lpp_alpha").get<double>();
  return r;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

ExperimentResult run_experiment(const HarnessConfig& cfg) {
  cfg.validate();

  std::vector<Task> tasks;
  for (const SchedulerKind sched : cfg.sweep.schedulers)
    for (int drop = 0; drop < cfg.sweep.drops; ++drop)
      tasks.push_back({sched, drop});

  struct Slot {
    TaskOutput out;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(tasks.size());

  std::size_t n_threads = cfg.threads > 0
                              ? std::size_t(cfg.threads)
                              : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, tasks.size());

  auto worker = [&](std::atomic<std::size_t>& next) {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        slots[i].out = run_task(cfg, tasks[i]);
      } catch (...) {
        slots[i].error = std::current_exception();
      }
    }
  };

  std::atomic<std::size_t> next{0};
  if (n_threads <= 1) {
    worker(next);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i)
      pool.emplace_back([&] { worker(next); });
    for (auto& t : pool) t.join();
  }
  for (const auto& slot : slots)
    if (slot.error) std::rethrow_exception(slot.error);

  // Assembly in fixed task order keeps results independent of scheduling;
  // the canonical sort then fixes the final order entirely.
  ExperimentResult res;
  for (auto& slot : slots) {
    res.rows.insert(res.rows.end(), slot.out.rows.begin(),
                    slot.out.rows.end());
    res.lpp_alpha_rows.insert(res.lpp_alpha_rows.end(),
                              slot.out.alpha_rows.begin(),
                              slot.out.alpha_rows.end());
  }
  std::stable_sort(res.rows.begin(), res.rows.end(), row_less);
  std::stable_sort(res.lpp_alpha_rows.begin(), res.lpp_alpha_rows.end(),
                   row_less);

  const std::string config_dump = config_to_json(cfg).dump();
  res.manifest = nlohmann::json{
      {"schema", "ipred.reports.v1"},
      {"version", IPRED_GIT_REV},
      {"seed", cfg.sim.seed},
      {"config_hash", to_hex(fnv1a64(config_dump))},
      {"config", config_to_json(cfg)},
  };
  return res;
}

void write_reports(const ExperimentResult& result,
                   const std::string& out_dir) {
  fs::create_directories(out_dir);

  std::string csv = "predictor,scheduler,L,gamma0,drop,ue,theta,mean_se,n_eval\n";
  for (const auto& r : result.rows) {
    csv += r.predictor;
    csv += ',';
    csv += to_string(r.scheduler);
    csv += ',';
    csv += std::to_string(r.training_len);
    csv += ',';
    if (r.gamma0) csv += fmt_double(*r.gamma0);
    csv += ',';
    csv += std::to_string(r.drop);
    csv += ',';
    csv += std::to_string(r.ue);
    csv += ',';
    csv += fmt_double(r.theta);
    csv += ',';
    csv += fmt_double(r.mean_se);
    csv += ',';
    csv += std::to_string(r.n_eval);
    csv += '\n';
  }
  write_text_file(fs::path(out_dir) / "reports.csv", csv);

  std::string acsv = "predictor,scheduler,L,alpha,drop,ue,theta,mean_se,n_eval\n";
  for (const auto& r : result.lpp_alpha_rows) {
    acsv += r.predictor;
    acsv += ',';
    acsv += to_string(r.scheduler);
    acsv += ',';
    acsv += std::to_string(r.training_len);
    acsv += ',';
    if (r.lpp_alpha) acsv += fmt_double(*r.lpp_alpha);
    acsv += ',';
    acsv += std::to_string(r.drop);
    acsv += ',';
    acsv += std::to_string(r.ue);
    acsv += ',';
    acsv += fmt_double(r.theta);
    acsv += ',';
    acsv += fmt_double(r.mean_se);
    acsv += ',';
    acsv += std::to_string(r.n_eval);
    acsv += '\n';
  }
  write_text_file(fs::path(out_dir) / "lpp_alpha_sweep.csv", acsv);

  nlohmann::json report{{"manifest", result.manifest}};
  report["rows"] = nlohmann::json::array();
  for (const auto& r : result.rows) report["rows"].push_back(row_to_json(r));
  report["lpp_alpha_rows"] = nlohmann::json::array();
  for (const auto& r : result.lpp_alpha_rows)
    report["lpp_alpha_rows"].push_back(row_to_json(r));
  write_text_file(fs::path(out_dir) / "reports.json", report.dump(2) + "\n");
  write_text_file(fs::path(out_dir) / "run_manifest.json",
                  result.manifest.dump(2) + "\n");
}

std::vector<std::pair<double, double>> cdf_of_theta(
    std::vector<double> thetas) {
  if (thetas.empty())
    throw std::invalid_argument("cdf_of_theta: no values");
  std::sort(thetas.begin(), thetas.end());
  std::vector<std::pair<double, double>> points;
  points.reserve(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i)
    points.emplace_back(thetas[i], static_cast<double>(i + 1) /
                                       static_cast<double>(thetas.size()));
  return points;
}

std::vector<EvalRow> load_report_rows(const std::string& reports_json_path) {
  std::ifstream in(reports_json_path);
  if (!in)
    throw std::runtime_error("cannot open report: " + reports_json_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("report " + reports_json_path +
                             " is not valid JSON: " + e.what());
  }
  std::vector<EvalRow> rows;
  for (const auto& rj : j.at("rows")) rows.push_back(row_from_json(rj));
  return rows;
}

namespace {

bool close_rel(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

struct MeanAcc {
  double theta = 0.0;
  double se = 0.0;
  int n = 0;
  void add(const EvalRow& r) {
    theta += r.theta;
    se += r.mean_se;
    ++n;
  }
};

}  // namespace

std::string export_fig(int fig, const std::string& reports_dir,
                       const std::string& out_dir, double gamma0,
                       std::int64_t training_len) {
  if (fig < 2 || fig > 5)
    throw std::invalid_argument("export_fig: fig must be 2..5");
  const std::vector<EvalRow> rows =
      load_report_rows((fs::path(reports_dir) / "reports.json").string());

  const SchedulerKind sched = (fig == 5) ? SchedulerKind::kProportionalFair
                                         : SchedulerKind::kRoundRobin;
  std::string csv;

  if (fig == 2) {
    // Mean failure rate / SE versus training length, at one target rate.
    std::map<std::pair<std::string, std::int64_t>, MeanAcc> groups;
    for (const auto& r : rows) {
      if (r.scheduler != sched) continue;
      if (r.gamma0 && !close_rel(*r.gamma0, gamma0)) continue;
      groups[{r.predictor, r.training_len}].add(r);
    }
    if (groups.empty())
      throw std::runtime_error("export_fig: no matching rows");
    csv = "predictor,L,mean_theta,mean_se\n";
    for (const auto& [key, acc] : groups)
      csv += key.first + "," + std::to_string(key.second) + "," +
             fmt_double(acc.theta / acc.n) + "," + fmt_double(acc.se / acc.n) +
             "\n";
  } else if (fig == 3) {
    // Per-UE failure-rate spread at one (L, gamma0) point.
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : rows) {
      if (r.scheduler != sched || r.training_len != training_len) continue;
      if (r.gamma0 && !close_rel(*r.gamma0, gamma0)) continue;
      groups[r.predictor].push_back(r.theta);
    }
    if (groups.empty())
      throw std::runtime_error("export_fig: no matching rows");
    csv = "predictor,theta,cdf\n";
    for (auto& [name, thetas] : groups)
      for (const auto& [theta, cdf] : cdf_of_theta(std::move(thetas)))
        csv += name + "," + fmt_double(theta) + "," + fmt_double(cdf) + "\n";
  } else {
    // Figures 4 and 5: failure rate / SE versus the target rate.
    std::map<std::pair<std::string, double>, MeanAcc> groups;
    for (const auto& r : rows) {
      if (r.scheduler != sched || r.training_len != training_len) continue;
      groups[{r.predictor, r.gamma0.value_or(-1.0)}].add(r);
    }
    if (groups.empty())
      throw std::runtime_error("export_fig: no matching rows");
    csv = "predictor,gamma0,mean_theta,mean_se\n";
    for (const auto& [key, acc] : groups) {
      csv += key.first + ",";
      if (key.second >= 0.0) csv += fmt_double(key.second);
      csv += "," + fmt_double(acc.theta / acc.n) + "," +
             fmt_double(acc.se / acc.n) + "\n";
    }
  }

  fs::create_directories(out_dir);
  const fs::path out_path =
      fs::path(out_dir) / ("fig" + std::to_string(fig) + ".csv");
  write_text_file(out_path, csv);
  return out_path.string();
}

}  // namespace ipred
