#include "vrprox/bench/experiment.hpp"

#include "vrprox/bench/data.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

namespace vrprox::bench {

CsvRow to_csv_row(const TraceRow<double>& r) {
  return {double(r.k),     r.effective_passes, r.objective, r.objective_avg,
          r.gap,           r.variance,         r.seconds,   r.restart ? 1.0 : 0.0};
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  out << kTraceHeader << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      if (row[c]) out << format_number(*row[c]);
    }
    out << '\n';
  }
}

void write_trace_csv(std::ostream& out, const SolverTrace<double>& trace) {
  std::vector<CsvRow> rows;
  rows.reserve(trace.rows.size());
  for (const auto& r : trace.rows) rows.push_back(to_csv_row(r));
  write_trace_csv(out, rows);
}

std::vector<CsvRow> average_rows(const std::vector<const SolverTrace<double>*>& traces) {
  if (traces.empty()) return {};
  std::size_t len = traces.front()->rows.size();
  for (const auto* t : traces) len = std::min(len, t->rows.size());
  std::vector<CsvRow> out(len);
  for (std::size_t r = 0; r < len; ++r) {
    for (std::size_t c = 0; c < CsvRow().size(); ++c) {
      double sum = 0.0;
      bool complete = true;
      for (const auto* t : traces) {
        const auto v = to_csv_row(t->rows[r])[c];
        if (!v) {
          complete = false;
          break;
        }
        sum += *v;
      }
      if (complete) out[r][c] = sum / double(traces.size());
    }
    bool restart = false;
    for (const auto* t : traces) restart = restart || t->rows[r].restart;
    out[r][7] = restart ? 1.0 : 0.0;
  }
  return out;
}

Dataset<double> load_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset == "synthetic") return generate_synthetic(cfg.synthetic);
  LibsvmOptions o;
  o.p = cfg.dataset_p;
  o.map_zero_label = cfg.map_zero_label;
  o.binary_labels = cfg.loss == LossKind::logistic;
  o.normalize = cfg.normalize;
  std::filesystem::path path = cfg.dataset;
  if (path.is_relative()) path = cfg.base_dir / path;
  return load_libsvm(path, o);
}

Problem<double> build_problem(const ExperimentConfig& cfg, Dataset<double> data) {
  const double lambda = resolve_lambda(cfg.lambda_rule, data.n());
  RegularizerSpec<double> reg = cfg.regularizer;
  if (reg.kind == RegularizerKind::box_indicator && reg.lower.size() == 1) {
    reg = RegularizerSpec<double>::box(Vector<double>::Constant(data.p(), reg.lower[0]),
                                       Vector<double>::Constant(data.p(), reg.upper[0]));
  }
  try {
    return Problem<double>(std::move(data), cfg.loss, lambda, reg, cfg.mu);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunOptions<double> run_options(const ExperimentConfig& cfg, std::uint64_t seed) {
  RunOptions<double> o;
  o.max_passes = cfg.budget;
  o.averaging = cfg.averaging;
  o.record_every = cfg.record_every;
  o.seed = seed;
  o.perturbation = cfg.perturbation;
  o.mc_samples = cfg.mc_samples;
  o.eval_seed = cfg.eval_seed;
  o.variance_trials = cfg.variance_trials;
  o.record_time = cfg.timing;
  return o;
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (cfg.output.is_absolute()) return cfg.output;
  if (const char* root = std::getenv(kOutputRootEnv); root && *root)
    return std::filesystem::path(root) / cfg.output;
  return cfg.output;
}

std::optional<double> fitted_rate(const SolverTrace<double>& trace, double fstar) {
  std::size_t last = 0;
  while (last < trace.rows.size() && trace.rows[last].objective - fstar > 0.0) ++last;
  if (last < 2 || trace.rows[last - 1].k == trace.rows.front().k) return std::nullopt;
  return fit_linear_rate(trace, fstar, 0, last);
}

FstarEstimate<double> run_fstar(const ExperimentConfig& cfg, const Problem<double>& prob) {
  const auto dist = build_distribution(cfg.sampling, prob.smoothness());
  FstarEstimate<double> best;
  for (const auto seed : cfg.seeds) {
    auto est = estimate_fstar(prob, cfg.algorithms, dist, run_options(cfg, seed),
                              cfg.fstar_budget, cfg.stage1_epochs);
    if (est.value < best.value || (best.algorithm.empty() && !est.algorithm.empty())) {
      est.seed = seed;
      best = std::move(est);
    }
  }
  return best;
}

namespace {

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw std::runtime_error("error writing '" + path.string() + "'");
}

std::string run_stem(const std::string& algorithm, std::uint64_t seed) {
  return algorithm + "_seed" + std::to_string(seed);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  Dataset<double> data = load_dataset(cfg);
  const Problem<double> prob = build_problem(cfg, std::move(data));
  const auto dist = build_distribution(cfg.sampling, prob.smoothness());
  const auto out_dir = resolve_output_dir(cfg);
  std::filesystem::create_directories(out_dir);

  ExperimentReport report;
  if (cfg.fstar_mode == FstarMode::value) {
    report.fstar = cfg.fstar_value;
  } else if (cfg.fstar_mode == FstarMode::automatic) {
    report.fstar = run_fstar(cfg, prob).value;
  }

  for (const auto a : cfg.algorithms)
    for (const auto seed : cfg.seeds) {
      RunRecord r;
      r.algorithm = to_string(a);
      r.seed = seed;
      report.runs.push_back(std::move(r));
    }

  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next++) < report.runs.size();) {
      RunRecord& r = report.runs[j];
      try {
        auto res = run_algorithm(prob, parse_algorithm(r.algorithm), dist,
                                 run_options(cfg, r.seed), cfg.stage1_epochs);
        r.trace = std::move(res.trace);
        r.x = std::move(res.output);
        if (report.fstar && r.trace.ok()) r.rate = fitted_rate(r.trace, *report.fstar);
      } catch (const std::exception& e) {
        r.error = e.what();
        r.trace.algorithm = r.algorithm;
      }
      if (log) {
        std::lock_guard lock(log_mutex);
        *log << run_stem(r.algorithm, r.seed) << ": "
             << (r.ok() ? "ok" : "FAILED (" + (r.error.empty() ? r.trace.failure : r.error) + ")")
             << '\n';
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(cfg.threads, int(report.runs.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& r : report.runs) {
    if (!r.error.empty()) continue;
    const auto path = out_dir / (run_stem(r.algorithm, r.seed) + ".csv");
    write_file(path, [&](std::ostream& os) { write_trace_csv(os, r.trace); });
    report.files.push_back(path);
    if (cfg.save_weights && r.x.size() > 0) {
      const auto wpath = out_dir / (run_stem(r.algorithm, r.seed) + ".weights");
      write_file(wpath, [&](std::ostream& os) { write_weights(os, r.x); });
      report.files.push_back(wpath);
    }
  }
  for (const auto a : cfg.algorithms) {
    std::vector<const SolverTrace<double>*> ok;
    for (const auto& r : report.runs)
      if (r.algorithm == to_string(a) && r.ok()) ok.push_back(&r.trace);
    if (ok.empty()) continue;
    const auto path = out_dir / (std::string(to_string(a)) + "_mean.csv");
    write_file(path, [&](std::ostream& os) { write_trace_csv(os, average_rows(ok)); });
    report.files.push_back(path);
  }

  for (const auto& r : report.runs)
    if (!r.ok()) ++report.failures;
  const auto spath = out_dir / "summary.csv";
  write_file(spath, [&](std::ostream& os) {
    os << "algorithm,seed,status,iterations,effective_passes,final_objective,"
          "final_gap,fitted_rate,fstar,message\n";
    for (const auto& r : report.runs) {
      const TraceRow<double>* last = r.trace.rows.empty() ? nullptr : &r.trace.rows.back();
      std::string msg = r.error.empty() ? r.trace.failure : r.error;
      for (char& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      os << r.algorithm << ',' << r.seed << ',' << (r.ok() ? "ok" : "failed") << ','
         << (last ? std::to_string(last->k) : "") << ','
         << (last ? format_number(last->effective_passes) : "") << ','
         << (last ? format_number(last->objective) : "") << ','
         << (last && last->gap ? format_number(*last->gap) : "") << ','
         << (r.rate ? format_number(*r.rate) : "") << ','
         << (report.fstar ? format_number(*report.fstar) : "") << ',' << msg << '\n';
    }
  });
  report.files.push_back(spath);
  return report;
}

}  // namespace vrprox::bench
