#include "vrprox/bench/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

namespace vrprox::bench {

DataError::DataError(const std::string& origin, std::size_t line,
                     const std::string& what)
    : std::runtime_error(line ? origin + ":" + std::to_string(line) + ": " + what
                              : origin + ": " + what),
      line_(line) {}

namespace {

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  // from_chars has no leading +
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() &&
         std::isfinite(out);
}

}  // namespace

Dataset<double> parse_libsvm(std::istream& in, const LibsvmOptions& opts,
                             const std::string& origin) {
  struct Entry {
    Index col;
    double val;
  };
  std::vector<double> labels;
  std::vector<std::vector<Entry>> rows;
  Index max_index = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    double label;
    if (!parse_double(tok, label))
      throw DataError(origin, lineno, "malformed label '" + tok + "'");
    if (opts.map_zero_label && label == 0.0) label = -1.0;
    if (opts.binary_labels && label != 1.0 && label != -1.0)
      throw DataError(origin, lineno,
                      "label " + tok + " is not binary (expected -1 or +1)");
    std::vector<Entry> row;
    Index prev = 0;
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw DataError(origin, lineno, "expected <index>:<value>, got '" + tok + "'");
      long long idx = 0;
      const std::string_view is(tok.data(), colon);
      const auto res = std::from_chars(is.data(), is.data() + is.size(), idx);
      if (res.ec != std::errc() || res.ptr != is.data() + is.size() || idx < 1)
        throw DataError(origin, lineno, "bad feature index in '" + tok + "'");
      if (Index(idx) == prev)
        throw DataError(origin, lineno, "duplicate feature index " + std::to_string(idx));
      if (Index(idx) < prev)
        throw DataError(origin, lineno, "feature indices must be ascending");
      double val;
      if (!parse_double(std::string_view(tok).substr(colon + 1), val))
        throw DataError(origin, lineno, "bad feature value in '" + tok + "'");
      if (opts.p && Index(idx) > *opts.p)
        throw DataError(origin, lineno,
                        "feature index " + std::to_string(idx) + " exceeds p = " +
                            std::to_string(*opts.p));
      prev = Index(idx);
      row.push_back({Index(idx) - 1, val});
    }
    max_index = std::max(max_index, prev);
    labels.push_back(label);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(origin, 0, "no examples");
  const Index p = opts.p.value_or(max_index);
  if (p < 1) throw DataError(origin, 0, "no features");

  Dataset<double> d;
  d.features = RowMatrix<double>::Zero(Index(rows.size()), p);
  d.labels.resize(Index(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    d.labels[Index(i)] = labels[i];
    for (const auto& e : rows[i]) d.features(Index(i), e.col) = e.val;
  }
  if (opts.normalize) {
    for (Index i = 0; i < d.n(); ++i)
      if (d.features.row(i).norm() == 0.0)
        throw DataError(origin, std::size_t(i) + 1, "cannot normalize an all-zero row");
    d = normalize_rows(std::move(d));
  }
  return d;
}

Dataset<double> load_libsvm(const std::filesystem::path& path,
                            const LibsvmOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string(), 0, "cannot open file");
  return parse_libsvm(in, opts, path.string());
}

void write_libsvm(std::ostream& out, const Dataset<double>& data) {
  char buf[64];
  for (Index i = 0; i < data.n(); ++i) {
    out << (data.labels[i] > 0 ? "+1" : "-1");
    for (Index j = 0; j < data.p(); ++j) {
      std::snprintf(buf, sizeof buf, " %lld:%.17g", static_cast<long long>(j + 1),
                    data.features(i, j));
      out << buf;
    }
    out << '\n';
  }
}

Dataset<double> generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n < 1 || spec.p < 1)
    throw std::invalid_argument("synthetic n and p must be >= 1");
  Rng rng(mix_seed(seed));
  auto gauss = [&rng] {
    const double u1 = 1.0 - uniform01(rng);  // (0, 1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  Vector<double> w(spec.p);
  for (Index j = 0; j < spec.p; ++j) w[j] = gauss();

  Dataset<double> d;
  d.features.resize(spec.n, spec.p);
  d.labels.resize(spec.n);
  for (Index i = 0; i < spec.n; ++i) {
    for (Index j = 0; j < spec.p; ++j) d.features(i, j) = gauss();
    double label = d.features.row(i).dot(w) >= 0.0 ? 1.0 : -1.0;
    if (uniform01(rng) < spec.noise) label = -label;
    d.labels[i] = label;
  }
  return normalize_rows(std::move(d));
}

Dataset<double> generate_synthetic(const SyntheticSpec& spec) {
  return generate_synthetic(spec, spec.seed);
}

Vector<double> read_weights(const std::filesystem::path& path, Index p) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string(), 0, "cannot open file");
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) {
    double v;
    if (!parse_double(tok, v))
      throw DataError(path.string(), 0, "bad coefficient '" + tok + "'");
    vals.push_back(v);
  }
  if (Index(vals.size()) != p)
    throw DataError(path.string(), 0,
                    "expected " + std::to_string(p) + " coefficients, got " +
                        std::to_string(vals.size()));
  return Eigen::Map<Vector<double>>(vals.data(), p);
}

void write_weights(std::ostream& out, const Vector<double>& x) {
  char buf[40];
  for (Index j = 0; j < x.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g\n", x[j]);
    out << buf;
  }
}

}  // namespace vrprox::bench
