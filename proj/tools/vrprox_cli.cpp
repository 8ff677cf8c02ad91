// vrprox: run, fstar, synth and gap verbs over key=value experiment configs.

#include "vrprox/bench/config.hpp"
#include "vrprox/bench/data.hpp"
#include "vrprox/bench/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace vrprox;
using namespace vrprox::bench;

int cmd_run(const std::string& config_path, bool quiet) {
  const auto cfg = load_config(config_path);
  const auto report = run_experiment(cfg, quiet ? nullptr : &std::cerr);
  std::cout << "wrote " << report.files.size() << " files to "
            << resolve_output_dir(cfg).string() << '\n';
  if (report.failures) {
    std::cerr << report.failures << " of " << report.runs.size()
              << " runs failed; see summary.csv\n";
    return 2;
  }
  return 0;
}

int cmd_fstar(const std::string& config_path) {
  const auto cfg = load_config(config_path);
  const auto prob = build_problem(cfg, load_dataset(cfg));
  const auto est = run_fstar(cfg, prob);
  std::cout << "fstar " << format_number(est.value) << '\n'
            << "algorithm " << (est.algorithm.empty() ? "x0" : est.algorithm) << '\n'
            << "seed " << est.seed << '\n';
  if (est.gap) std::cout << "gap " << format_number(*est.gap) << '\n';
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_path) {
  std::ifstream in(spec_path);
  if (!in) throw ConfigError("cannot open spec '" + spec_path + "'");
  const auto spec = parse_synthetic_spec(parse_key_values(in, spec_path));
  const auto data = generate_synthetic(spec);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  write_libsvm(out, data);
  std::cout << "wrote " << data.n() << " x " << data.p() << " to " << out_path << '\n';
  return 0;
}

int cmd_gap(const std::string& config_path, const std::string& weights_path) {
  const auto cfg = load_config(config_path);
  const auto prob = build_problem(cfg, load_dataset(cfg));
  const auto x = read_weights(weights_path, prob.p());
  std::cout << "objective " << format_number(evaluate_objective(prob, x)) << '\n';
  if (!duality_gap_supported(prob)) {
    std::cerr << "duality gap needs lambda > 0 and regularizer none or l1\n";
    return 1;
  }
  std::cout << "gap " << format_number(duality_gap(prob, x)) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variance-reduced stochastic composite optimization benchmarks"};
  app.require_subcommand(1);

  std::string config, spec, out, weights;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run every (algorithm, seed) pair of a config");
  run->add_option("config", config, "experiment config")->required();
  run->add_flag("-q,--quiet", quiet, "no per-run progress on stderr");
  auto* fstar = app.add_subcommand("fstar", "estimate F* for a config");
  fstar->add_option("config", config, "experiment config")->required();
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset in libsvm format");
  synth->add_option("spec", spec, "key=value file with n, p, noise, seed")->required();
  synth->add_option("out", out, "output libsvm file")->required();
  auto* gap = app.add_subcommand("gap", "objective and duality gap of saved weights");
  gap->add_option("config", config, "experiment config")->required();
  gap->add_option("weights", weights, "whitespace separated coefficients")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, quiet);
    if (*fstar) return cmd_fstar(config);
    if (*synth) return cmd_synth(spec, out);
    if (*gap) return cmd_gap(config, weights);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
