#ifndef VRPROX_BENCH_DATA_HPP
#define VRPROX_BENCH_DATA_HPP

#include "vrprox/bench/config.hpp"
#include "vrprox/problem.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace vrprox::bench {

/// Malformed input data. `line` is 1-based, 0 when not tied to a line.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& origin, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct LibsvmOptions {
  /// Number of features; inferred from the largest index when unset.
  std::optional<Index> p;
  bool map_zero_label = false;
  /// Require labels in {-1, +1} (after mapping).
  bool binary_labels = true;
  bool normalize = false;
};

Dataset<double> parse_libsvm(std::istream& in, const LibsvmOptions& opts,
                             const std::string& origin = "<libsvm>");
Dataset<double> load_libsvm(const std::filesystem::path& path,
                            const LibsvmOptions& opts = {});
/// Dense rows written with every coordinate, 17 significant digits.
void write_libsvm(std::ostream& out, const Dataset<double>& data);

/// Gaussian features, labels from a planted Gaussian separator flipped with
/// probability spec.noise, rows normalized. Deterministic in (spec, seed).
Dataset<double> generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);
Dataset<double> generate_synthetic(const SyntheticSpec& spec);

/// Whitespace separated coefficients; exactly p of them.
Vector<double> read_weights(const std::filesystem::path& path, Index p);
void write_weights(std::ostream& out, const Vector<double>& x);

}  // namespace vrprox::bench

#endif  // VRPROX_BENCH_DATA_HPP
