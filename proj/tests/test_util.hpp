#pragma once

#include "mtnam/features.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace testutil {

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::path(MTNAM_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Feature matrix with one row per label; window i starts at i seconds.
inline mtnam::FeatureMatrix make_features(const mtnam::MatrixXd& rows, const std::vector<int>& labels) {
  mtnam::FeatureMatrix fm;
  fm.rows = rows;
  fm.labels = labels;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) fm.window_start_s.push_back(double(i));
  return fm;
}

/// Two Gaussian classes separated along every column.
inline mtnam::FeatureMatrix gaussian_classes(int n_per_class, int dim, double gap, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  mtnam::MatrixXd rows(2 * n_per_class, dim);
  std::vector<int> labels;
  for (int i = 0; i < 2 * n_per_class; ++i) {
    const int y = i % 2;
    labels.push_back(y);
    for (int j = 0; j < dim; ++j) rows(i, j) = noise(rng) + (y ? gap / 2 : -gap / 2);
  }
  return make_features(rows, labels);
}

}  // namespace testutil
