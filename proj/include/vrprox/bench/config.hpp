#ifndef VRPROX_BENCH_CONFIG_HPP
#define VRPROX_BENCH_CONFIG_HPP

#include "vrprox/problem.hpp"
#include "vrprox/sampling.hpp"
#include "vrprox/solvers.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vrprox::bench {

/// Malformed or inconsistent configuration. The CLI maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key=value text; '#' starts a comment, blank lines are skipped.
/// Duplicate keys are an error.
std::map<std::string, std::string> parse_key_values(std::istream& in,
                                                    const std::string& origin);

struct SyntheticSpec {
  Index n = 1000;
  Index p = 50;
  double noise = 0.1;  // label flip probability
  std::uint64_t seed = 1;
};

/// Reads n, p, noise and seed (with or without a "synthetic." prefix).
SyntheticSpec parse_synthetic_spec(const std::map<std::string, std::string>& kv);

enum class FstarMode { none, value, automatic };

struct ExperimentConfig {
  /// "synthetic" or a path to a libsvm file (relative to the config file)
  std::string dataset = "synthetic";
  SyntheticSpec synthetic;
  std::optional<Index> dataset_p;
  bool normalize = true;
  bool map_zero_label = false;

  LossKind loss = LossKind::logistic;
  std::string lambda_rule = "1/10n";
  std::optional<double> mu;
  RegularizerSpec<double> regularizer = RegularizerSpec<double>::none();
  PerturbationSpec<double> perturbation = PerturbationSpec<double>::none();

  std::vector<Algorithm> algorithms;
  SamplingMode sampling = SamplingMode::uniform;
  double budget = 100.0;
  double stage1_epochs = 0.0;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double record_every = 5.0;
  int mc_samples = 5;
  std::uint64_t eval_seed = 0x5eedULL;
  int variance_trials = -1;
  bool averaging = false;
  bool timing = false;
  bool save_weights = false;
  int threads = 1;

  FstarMode fstar_mode = FstarMode::none;
  double fstar_value = 0.0;
  double fstar_budget = 1000.0;

  std::filesystem::path output = "results";
  /// directory of the config file; relative dataset paths resolve against it
  std::filesystem::path base_dir = ".";
};

/// λ from its symbolic rule and n: "1/10n", "1/(100n)", "c/n" or a number.
double resolve_lambda(const std::string& rule, Index n);

ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace vrprox::bench

#endif  // VRPROX_BENCH_CONFIG_HPP
