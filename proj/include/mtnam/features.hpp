#pragma once

#include "mtnam/signal_io.hpp"
#include "mtnam/types.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mtnam {

/// Features per channel: 7 band powers, then line length, then variance.
inline constexpr int kFeaturesPerChannel = 9;
inline constexpr int kNumBands = 7;

struct Band {
  const char* name;
  double low_hz;
  double high_hz;
};

/// delta, theta, alpha, beta, low-gamma, gamma, high-gamma.
inline constexpr std::array<Band, kNumBands> kBands{{
    {"delta", 1.0, 4.0},
    {"theta", 4.0, 8.0},
    {"alpha", 8.0, 13.0},
    {"beta", 13.0, 30.0},
    {"low_gamma", 30.0, 50.0},
    {"gamma", 50.0, 80.0},
    {"high_gamma", 80.0, 120.0},
}};

/// Column index of feature `feature` (0..8) of channel `channel`.
inline constexpr int feature_index(int channel, int feature) { return channel * kFeaturesPerChannel + feature; }

/// Per-window feature vectors. Row r of `rows` is window r; column layout
/// follows feature_index().
struct FeatureMatrix {
  MatrixXd rows;
  std::vector<int> labels;
  std::vector<double> window_start_s;
  double window_s{1.0};

  Eigen::Index n_windows() const { return rows.rows(); }
  Eigen::Index dim() const { return rows.cols(); }

  /// Windows [begin, end) as a new matrix.
  FeatureMatrix slice(Eigen::Index begin, Eigen::Index end) const;
  /// Windows at the given (ascending) indices.
  FeatureMatrix select(const std::vector<Eigen::Index>& idx) const;
  Eigen::Index count_ictal() const;
};

struct WindowBound {
  std::size_t start_sample;
  std::size_t end_sample;
  int label;
};

std::vector<WindowBound> window_bounds(const Recording& rec, double win_s = 1.0);

double line_length(std::span<const double> x);
double variance(std::span<const double> x);

/// Two-sided periodogram normalised so that the bins sum to the mean square
/// of x: P_k = |X_k|^2 / (L * L_fft), with zero padding to the next power
/// of two.
std::vector<double> periodogram(std::span<const double> x);

struct BandPowers {
  std::array<double, kNumBands> power{};
  /// Set when fs is too low to resolve a band's lower edge; the band is 0.
  std::array<bool, kNumBands> unresolved{};
};

/// One-sided power in each band, lower edge inclusive, upper edge exclusive.
BandPowers band_powers(std::span<const double> x, int fs);

FeatureMatrix extract_features(const Recording& rec, double win_s = 1.0);

/// Z-score statistics fitted on training windows only.
struct Scaler {
  static constexpr double kStdFloor = 1e-8;
  VectorXd mean;
  VectorXd stddev;

  static Scaler fit(const FeatureMatrix& train);
  static Scaler identity(Eigen::Index dim);
  FeatureMatrix apply(const FeatureMatrix& fm) const;
  VectorXd apply(const VectorXd& x) const;
};

inline Scaler fit_scaler(const FeatureMatrix& train) { return Scaler::fit(train); }
inline FeatureMatrix apply_scaler(const Scaler& s, const FeatureMatrix& fm) { return s.apply(fm); }

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& fm,
                       const std::string& header_comment = {});
FeatureMatrix read_feature_csv(const std::filesystem::path& path, double window_s = 1.0);

}  // namespace mtnam
