#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lgr/features.hpp"

namespace lgr {

/// A regression corpus. clean_targets is empty unless the data is synthetic
/// and the noise-free ground truth is known.
struct Dataset {
  Matrix inputs;         // N x D
  Vector targets;        // N
  Vector clean_targets;  // N or empty

  int n() const { return static_cast<int>(inputs.rows()); }
  int dim() const { return static_cast<int>(inputs.cols()); }
  bool has_clean() const { return clean_targets.size() == targets.size() && targets.size() > 0; }
};

/// x uniform on [0, 2*pi], y = sin(x) + N(0, noise_sd^2).
Dataset gen_sine(int n, double noise_sd, std::uint64_t seed);

/// Value of the 2-D cross benchmark function: the max of three Gaussian bumps.
double cross2d_value(double x1, double x2);

/// n inputs uniform on [-1, 1]^2, targets cross2d_value + N(0, noise_sd^2).
Dataset gen_cross2d(int n, double noise_sd, std::uint64_t seed);

/// Noise-free regular edge x edge grid on [-1, 1]^2.
Dataset cross2d_grid(int edge);

/// Loads a headered CSV. One column becomes the target; the remaining numeric
/// columns become inputs in header order. When select_patterns is non-empty,
/// only input columns whose header matches one of the patterns ('*' wildcard)
/// are kept.
Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::vector<std::string>& select_patterns = {});

/// Writes a dataset as CSV with the given input column names, a target column
/// and, when present, a clean-target column. Values round-trip exactly.
void save_csv(const std::string& path, const Dataset& data,
              const std::vector<std::string>& input_names = {},
              const std::string& target_name = "y",
              const std::string& clean_name = "y_clean");

double mse(const Vector& predictions, const Vector& targets);

/// MSE divided by the population variance of the targets. Throws on zero
/// target variance.
double nmse(const Vector& predictions, const Vector& targets);

/// Seeded shuffle followed by a split into (first, second) parts; the first
/// holds round(fraction * N) rows.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double fraction,
                                             std::uint64_t seed);

}  // namespace lgr
