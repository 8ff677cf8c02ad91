#include "vrprox/bench/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace vrprox::bench {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty())
    throw ConfigError("'" + key + "': expected a number, got '" + v + "'");
  return d;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("'" + key + "': expected a nonnegative integer, got '" +
                      v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "': expected true/false, got '" + v + "'");
}

/// "name" or "name:arg[:arg]"
std::pair<std::string, std::vector<std::string>> split_spec(const std::string& v) {
  auto parts = split(v, ':');
  if (parts.empty()) return {"", {}};
  std::string head = parts.front();
  parts.erase(parts.begin());
  return {head, parts};
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in,
                                                    const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
  }
  return kv;
}

SyntheticSpec parse_synthetic_spec(const std::map<std::string, std::string>& kv) {
  SyntheticSpec s;
  auto get = [&](const std::string& name) -> const std::string* {
    for (const std::string& k : {"synthetic." + name, name}) {
      const auto it = kv.find(k);
      if (it != kv.end()) return &it->second;
    }
    return nullptr;
  };
  if (const auto* v = get("n")) s.n = to_int("n", *v);
  if (const auto* v = get("p")) s.p = to_int("p", *v);
  if (const auto* v = get("noise")) s.noise = to_double("noise", *v);
  if (const auto* v = get("seed")) s.seed = to_uint("seed", *v);
  if (s.n < 1 || s.p < 1) throw ConfigError("synthetic n and p must be >= 1");
  if (!(s.noise >= 0.0 && s.noise <= 1.0))
    throw ConfigError("synthetic noise must lie in [0, 1]");
  return s;
}

double resolve_lambda(const std::string& rule, Index n) {
  if (n < 1) throw ConfigError("lambda rule needs n >= 1");
  static const std::regex symbolic(
      R"(^\s*([0-9.eE+-]+)\s*/\s*\(?\s*([0-9.eE+-]*)\s*\*?\s*n\s*\)?\s*$)");
  std::smatch m;
  double lambda;
  if (std::regex_match(rule, m, symbolic)) {
    const double num = to_double("lambda", m[1].str());
    const double coef = m[2].str().empty() ? 1.0 : to_double("lambda", m[2].str());
    lambda = num / (coef * double(n));
  } else {
    lambda = to_double("lambda", trim(rule));
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ConfigError("lambda rule '" + rule + "' does not evaluate positive");
  return lambda;
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  const auto kv = parse_key_values(in, origin);
  ExperimentConfig c;
  std::set<std::string> used;
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };

  if (const auto* v = get("dataset")) c.dataset = *v;
  {
    std::map<std::string, std::string> synth;
    for (const auto& [k, v] : kv)
      if (k.rfind("synthetic.", 0) == 0) {
        synth.emplace(k, v);
        used.insert(k);
      }
    c.synthetic = parse_synthetic_spec(synth);
  }
  if (const auto* v = get("dataset.p")) c.dataset_p = to_int("dataset.p", *v);
  if (const auto* v = get("normalize")) c.normalize = to_bool("normalize", *v);
  if (const auto* v = get("map_zero_label"))
    c.map_zero_label = to_bool("map_zero_label", *v);

  if (const auto* v = get("loss")) {
    if (*v == "logistic")
      c.loss = LossKind::logistic;
    else if (*v == "squared")
      c.loss = LossKind::squared;
    else
      throw ConfigError("unknown loss '" + *v + "'");
  }
  if (const auto* v = get("lambda")) {
    c.lambda_rule = *v;
    resolve_lambda(*v, 1);  // syntax check; the value depends on n
  }
  if (const auto* v = get("mu")) c.mu = to_double("mu", *v);

  if (const auto* v = get("regularizer")) {
    const auto [name, args] = split_spec(*v);
    try {
      if (name == "none" && args.empty()) {
        c.regularizer = RegularizerSpec<double>::none();
      } else if (name == "l1" && args.size() == 1) {
        c.regularizer = RegularizerSpec<double>::l1(to_double("regularizer", args[0]));
      } else if (name == "box" && args.size() == 2) {
        Vector<double> lo(1), hi(1);
        lo[0] = to_double("regularizer", args[0]);
        hi[0] = to_double("regularizer", args[1]);
        c.regularizer = RegularizerSpec<double>::box(lo, hi);
      } else {
        throw ConfigError("regularizer must be none, l1:<w> or box:<lo>:<hi>");
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("regularizer: ") + e.what());
    }
  }
  if (const auto* v = get("perturbation")) {
    const auto [name, args] = split_spec(*v);
    try {
      if (name == "none" && args.empty())
        c.perturbation = PerturbationSpec<double>::none();
      else if (name == "dropout" && args.size() == 1)
        c.perturbation = PerturbationSpec<double>::dropout(to_double("perturbation", args[0]));
      else if (name == "gaussian" && args.size() == 1)
        c.perturbation = PerturbationSpec<double>::gaussian(to_double("perturbation", args[0]));
      else
        throw ConfigError("perturbation must be none, dropout:<rate> or gaussian:<stddev>");
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("perturbation: ") + e.what());
    }
  }

  if (const auto* v = get("algorithms")) {
    for (const auto& name : split(*v, ',')) {
      try {
        c.algorithms.push_back(parse_algorithm(name));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (c.algorithms.empty()) throw ConfigError("'algorithms' must list at least one algorithm");
  if (const auto* v = get("sampling")) {
    try {
      c.sampling = parse_sampling_mode(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (const auto* v = get("budget")) c.budget = to_double("budget", *v);
  if (!(c.budget > 0.0)) throw ConfigError("budget must be positive");
  if (const auto* v = get("stage1_epochs")) c.stage1_epochs = to_double("stage1_epochs", *v);
  if (c.stage1_epochs < 0.0) throw ConfigError("stage1_epochs must be >= 0");

  const auto* seeds = get("seeds");
  const auto* num_seeds = get("num_seeds");
  if (seeds && num_seeds) throw ConfigError("give either 'seeds' or 'num_seeds'");
  if (seeds) {
    c.seeds.clear();
    for (const auto& s : split(*seeds, ',')) c.seeds.push_back(to_uint("seeds", s));
    if (c.seeds.empty()) throw ConfigError("'seeds' is empty");
  } else if (num_seeds) {
    const auto count = to_int("num_seeds", *num_seeds);
    if (count < 1) throw ConfigError("num_seeds must be >= 1");
    c.seeds.clear();
    for (std::int64_t s = 1; s <= count; ++s) c.seeds.push_back(std::uint64_t(s));
  }

  if (const auto* v = get("record_every")) c.record_every = to_double("record_every", *v);
  if (!(c.record_every > 0.0)) throw ConfigError("record_every must be positive");
  if (const auto* v = get("mc_samples")) c.mc_samples = int(to_int("mc_samples", *v));
  if (c.mc_samples < 1) throw ConfigError("mc_samples must be >= 1");
  if (const auto* v = get("eval_seed")) c.eval_seed = to_uint("eval_seed", *v);
  if (const auto* v = get("variance")) {
    if (*v == "off")
      c.variance_trials = -1;
    else if (*v == "exact")
      c.variance_trials = 0;
    else
      c.variance_trials = int(to_int("variance", *v));
    if (c.variance_trials < -1) throw ConfigError("variance must be off, exact or a count");
    if (c.variance_trials == 0 && c.perturbation.active())
      throw ConfigError("variance = exact needs an inactive perturbation");
  }
  if (const auto* v = get("averaging")) c.averaging = to_bool("averaging", *v);
  if (const auto* v = get("timing")) c.timing = to_bool("timing", *v);
  if (const auto* v = get("save_weights")) c.save_weights = to_bool("save_weights", *v);
  if (const auto* v = get("threads")) c.threads = int(to_int("threads", *v));
  if (c.threads < 1) throw ConfigError("threads must be >= 1");

  if (const auto* v = get("fstar")) {
    if (*v == "none") {
      c.fstar_mode = FstarMode::none;
    } else if (*v == "auto") {
      c.fstar_mode = FstarMode::automatic;
    } else {
      c.fstar_mode = FstarMode::value;
      c.fstar_value = to_double("fstar", *v);
    }
  }
  if (const auto* v = get("fstar_budget")) c.fstar_budget = to_double("fstar_budget", *v);
  if (c.fstar_budget < 0.0) throw ConfigError("fstar_budget must be >= 0");
  if (const auto* v = get("output")) c.output = *v;

  for (const auto& [k, v] : kv)
    if (!used.count(k)) throw ConfigError(origin + ": unknown key '" + k + "'");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  ExperimentConfig c = parse_config(in, path.string());
  c.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return c;
}

}  // namespace vrprox::bench
