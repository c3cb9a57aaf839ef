#pragma once

#include "mtnam/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mtnam {

/// Seizure interval in seconds, half-open [start_s, end_s).
struct Interval {
  double start_s{0.0};
  double end_s{0.0};
  bool operator==(const Interval&) const = default;
};

/// Multichannel EEG recording. samples[c][i] is channel c at time i / fs
/// in physical units (microvolts).
struct Recording {
  std::vector<std::string> channels;
  int fs{0};
  std::vector<std::vector<double>> samples;
  std::vector<Interval> seizures;

  std::size_t n_channels() const { return samples.size(); }
  std::size_t n_samples() const { return samples.empty() ? 0 : samples.front().size(); }
  double duration_s() const { return fs > 0 ? double(n_samples()) / fs : 0.0; }

  /// Throws a data error when any Recording invariant is violated.
  void validate() const;
};

/// One spectral band boost for planted seizures.
struct BandEffect {
  double low_hz{0.0};
  double high_hz{0.0};
  double amplitude{0.0};  // sinusoid amplitude in microvolts
};

struct SynthConfig {
  int n_channels{4};
  double duration_s{60.0};
  int fs{256};
  std::vector<Interval> seizures;
  double noise_scale{10.0};
  std::vector<BandEffect> band_effects;
  double line_length_boost{0.0};  // ictal amplitude gain minus one
  std::uint64_t seed{0};

  void validate() const;

  /// Effect sizes suitable for a clearly separable synthetic patient.
  static std::vector<BandEffect> strong_effects();
};

Recording read_edf(const std::filesystem::path& path, const std::vector<std::string>& select = {});
Recording read_csv_recording(const std::filesystem::path& path, int fs);
void write_csv_recording(const std::filesystem::path& path, const Recording& rec,
                         const std::string& header_comment = {});
std::vector<Interval> load_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, const std::vector<Interval>& events,
                       const std::string& header_comment = {});

/// Sorts the intervals and rejects negative, empty or overlapping ones.
std::vector<Interval> validate_intervals(std::vector<Interval> events);

Recording synth_recording(const SynthConfig& cfg);

/// 17 significant digits: enough for a lossless text round trip.
std::string format_double(double v);

/// Strict decimal parse of a whole field; throws a data error otherwise.
double parse_double(std::string_view field);

/// Splits one CSV line on commas (no quoting) and trims whitespace.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace mtnam
