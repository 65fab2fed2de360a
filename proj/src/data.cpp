#include "lgr/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "lgr/errors.hpp"

namespace lgr {

namespace {

void check_gen_args(int n, double noise_sd) {
  if (n < 1) throw std::invalid_argument("generator: n must be >= 1");
  if (noise_sd < 0.0 || !std::isfinite(noise_sd)) {
    throw std::invalid_argument("generator: noise_sd must be finite and >= 0");
  }
}

// Glob-lite: '*' matches any run of characters, everything else is literal.
bool glob_match(const std::string& pattern, const std::string& text) {
  size_t p = 0, t = 0, star = std::string::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == text[t])) {
      ++p, ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset gen_sine(int n, double noise_sd, std::uint64_t seed) {
  check_gen_args(n, noise_sd);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset data;
  data.inputs.resize(n, 1);
  data.targets.resize(n);
  data.clean_targets.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = ux(rng);
    data.inputs(i, 0) = x;
    data.clean_targets(i) = std::sin(x);
    data.targets(i) = data.clean_targets(i) + (noise_sd > 0.0 ? noise_sd * noise(rng) : 0.0);
  }
  return data;
}

double cross2d_value(double x1, double x2) {
  const double a = std::exp(-10.0 * x1 * x1);
  const double b = std::exp(-50.0 * x2 * x2);
  const double c = 1.25 * std::exp(-5.0 * (x1 * x1 + x2 * x2));
  return std::max({a, b, c});
}

Dataset gen_cross2d(int n, double noise_sd, std::uint64_t seed) {
  check_gen_args(n, noise_sd);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset data;
  data.inputs.resize(n, 2);
  data.targets.resize(n);
  data.clean_targets.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x1 = ux(rng);
    const double x2 = ux(rng);
    data.inputs(i, 0) = x1;
    data.inputs(i, 1) = x2;
    data.clean_targets(i) = cross2d_value(x1, x2);
    data.targets(i) = data.clean_targets(i) + (noise_sd > 0.0 ? noise_sd * noise(rng) : 0.0);
  }
  return data;
}

Dataset cross2d_grid(int edge) {
  if (edge < 2) throw std::invalid_argument("cross2d_grid: edge must be >= 2");
  Dataset data;
  const int n = edge * edge;
  data.inputs.resize(n, 2);
  data.targets.resize(n);
  int i = 0;
  for (int r = 0; r < edge; ++r) {
    const double x1 = -1.0 + 2.0 * r / (edge - 1);
    for (int c = 0; c < edge; ++c) {
      const double x2 = -1.0 + 2.0 * c / (edge - 1);
      data.inputs(i, 0) = x1;
      data.inputs(i, 1) = x2;
      data.targets(i) = cross2d_value(x1, x2);
      ++i;
    }
  }
  data.clean_targets = data.targets;
  return data;
}

Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::vector<std::string>& select_patterns) {
  std::ifstream in(path);
  if (!in) throw DataError("load_csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("load_csv: '" + path + "' is empty");
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);

  int target_idx = -1;
  std::vector<int> input_idx;
  for (int j = 0; j < static_cast<int>(header.size()); ++j) {
    if (header[j] == target_column) {
      if (target_idx >= 0) throw DataError("load_csv: duplicate target column '" + target_column + "'");
      target_idx = j;
      continue;
    }
    if (select_patterns.empty()) {
      input_idx.push_back(j);
    } else {
      for (const auto& pat : select_patterns) {
        if (glob_match(pat, header[j])) {
          input_idx.push_back(j);
          break;
        }
      }
    }
  }
  if (target_idx < 0) {
    throw DataError("load_csv: target column '" + target_column + "' not found in '" + path + "'");
  }
  if (input_idx.empty()) throw DataError("load_csv: no input columns selected");

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("load_csv: row " + std::to_string(lineno) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    std::vector<double> row(header.size());
    for (size_t j = 0; j < cells.size(); ++j) {
      const std::string cell = trim(cells[j]);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw DataError("load_csv: non-numeric cell at row " + std::to_string(lineno) +
                        ", column '" + header[j] + "'");
      }
      row[j] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("load_csv: '" + path + "' has no data rows");

  Dataset data;
  data.inputs.resize(rows.size(), input_idx.size());
  data.targets.resize(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    data.targets(i) = rows[i][target_idx];
    for (size_t j = 0; j < input_idx.size(); ++j) data.inputs(i, j) = rows[i][input_idx[j]];
  }
  return data;
}

void save_csv(const std::string& path, const Dataset& data,
              const std::vector<std::string>& input_names, const std::string& target_name,
              const std::string& clean_name) {
  if (!input_names.empty() && static_cast<int>(input_names.size()) != data.dim()) {
    throw std::invalid_argument("save_csv: input_names size does not match dataset dimension");
  }
  std::ofstream out(path);
  if (!out) throw DataError("save_csv: cannot open '" + path + "' for writing");

  for (int j = 0; j < data.dim(); ++j) {
    out << (input_names.empty() ? "x" + std::to_string(j + 1) : input_names[j]) << ",";
  }
  out << target_name;
  if (data.has_clean()) out << "," << clean_name;
  out << "\n";

  char buf[64];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.dim(); ++j) {
      emit(data.inputs(i, j));
      out << ",";
    }
    emit(data.targets(i));
    if (data.has_clean()) {
      out << ",";
      emit(data.clean_targets(i));
    }
    out << "\n";
  }
  if (!out) throw DataError("save_csv: write to '" + path + "' failed");
}

double mse(const Vector& predictions, const Vector& targets) {
  if (predictions.size() != targets.size()) {
    throw std::invalid_argument("mse: length mismatch");
  }
  if (targets.size() == 0) throw std::invalid_argument("mse: empty input");
  return (predictions - targets).squaredNorm() / static_cast<double>(targets.size());
}

double nmse(const Vector& predictions, const Vector& targets) {
  if (targets.size() < 2) throw std::invalid_argument("nmse: need at least 2 targets");
  const double mean = targets.mean();
  const double var = (targets.array() - mean).square().mean();
  if (var <= 0.0) throw std::invalid_argument("nmse: undefined for zero target variance");
  return mse(predictions, targets) / var;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double fraction,
                                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("train_test_split: fraction must be in (0, 1)");
  }
  std::vector<int> order(data.n());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const int n_first = static_cast<int>(std::lround(fraction * data.n()));
  auto take = [&](int begin, int count) {
    Dataset part;
    part.inputs.resize(count, data.dim());
    part.targets.resize(count);
    if (data.has_clean()) part.clean_targets.resize(count);
    for (int i = 0; i < count; ++i) {
      const int src = order[begin + i];
      part.inputs.row(i) = data.inputs.row(src);
      part.targets(i) = data.targets(src);
      if (data.has_clean()) part.clean_targets(i) = data.clean_targets(src);
    }
    return part;
  };
  return {take(0, n_first), take(n_first, data.n() - n_first)};
}

}  // namespace lgr
