#ifndef VRPROX_BENCH_EXPERIMENT_HPP
#define VRPROX_BENCH_EXPERIMENT_HPP

#include "vrprox/bench/config.hpp"
#include "vrprox/fstar.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vrprox::bench {

inline constexpr const char* kTraceHeader =
    "k,effective_passes,objective,objective_avg,gap,variance,seconds,restart";
inline constexpr const char* kOutputRootEnv = "VRPROX_OUTPUT_ROOT";

/// One CSV row in header order; empty optionals become empty fields.
using CsvRow = std::array<std::optional<double>, 8>;

CsvRow to_csv_row(const TraceRow<double>& row);
std::string format_number(double v);
void write_trace_csv(std::ostream& out, const std::vector<CsvRow>& rows);
void write_trace_csv(std::ostream& out, const SolverTrace<double>& trace);

/// Column-wise arithmetic mean at each row index, truncated to the shortest
/// input. A column stays empty unless every input has it; restart is 1 when
/// any input restarted at that row.
std::vector<CsvRow> average_rows(const std::vector<const SolverTrace<double>*>& traces);

/// Dataset from the config (synthetic or libsvm) and the problem built on it.
Dataset<double> load_dataset(const ExperimentConfig& cfg);
Problem<double> build_problem(const ExperimentConfig& cfg, Dataset<double> data);
RunOptions<double> run_options(const ExperimentConfig& cfg, std::uint64_t seed);

/// Output directory after applying the VRPROX_OUTPUT_ROOT override to a
/// relative `output`.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

struct RunRecord {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::string error;  // empty on success
  SolverTrace<double> trace;
  Vector<double> x;
  std::optional<double> rate;

  bool ok() const { return error.empty() && trace.ok(); }
};

struct ExperimentReport {
  std::vector<RunRecord> runs;
  std::vector<std::filesystem::path> files;
  std::optional<double> fstar;
  std::size_t failures = 0;
};

/// Runs every (algorithm, seed) pair and writes
///   <out>/<algorithm>_seed<seed>.csv, <out>/<algorithm>_mean.csv,
///   <out>/summary.csv
/// Failed runs are listed in the summary and skipped in the means.
ExperimentReport run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// F* for the configured problem over the configured algorithms and seeds.
FstarEstimate<double> run_fstar(const ExperimentConfig& cfg, const Problem<double>& prob);

/// Contraction per iteration fitted on the rows before the first
/// non-positive F - F*; empty when fewer than two rows qualify.
std::optional<double> fitted_rate(const SolverTrace<double>& trace, double fstar);

}  // namespace vrprox::bench

#endif  // VRPROX_BENCH_EXPERIMENT_HPP
