#pragma once

#include "mtnam/config.hpp"
#include "mtnam/eval.hpp"
#include "mtnam/features.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mtnam {

/// Artifact names inside the output directory.
namespace files {
inline constexpr const char* kRecording = "recording.csv";
inline constexpr const char* kAnnotations = "annotations.csv";
inline constexpr const char* kFeatures = "features.csv";
inline constexpr const char* kEvents = "events.csv";
inline constexpr const char* kNam = "nam.model";
inline constexpr const char* kGridReport = "grid_report.csv";
inline constexpr const char* kLr = "lr.model";
inline constexpr const char* kDnn = "dnn.model";
inline constexpr const char* kBaselineReport = "baseline_report.csv";
inline constexpr const char* kMetricsOffline = "metrics_offline";
inline constexpr const char* kMetricsAdapted = "metrics_adapted";
inline constexpr const char* kH0Report = "h0_report.csv";
inline constexpr const char* kBench = "bench.csv";
std::string mtnam_model(int depth);
std::string stream(const std::string& model);
}  // namespace files

struct RunContext {
  PipelineConfig cfg;
  std::ostream* log{nullptr};  // progress messages; null is silent
  bool warn_on_hash_mismatch{true};

  std::filesystem::path out(const std::string& name) const { return cfg.out_dir / name; }
  std::string header() const;
};

/// Chronological split with train-only scaling and non-ictal downsampling,
/// rebuilt identically by every stage that needs it.
struct PreparedData {
  Split split;  // unscaled
  Scaler scaler;
  FeatureMatrix train;  // scaled, downsampled
  FeatureMatrix val;    // scaled
  FeatureMatrix test;   // scaled
  std::vector<Interval> events;
};

PreparedData prepare_data(const RunContext& ctx);

void cmd_synth(const RunContext& ctx);
void cmd_extract(const RunContext& ctx);
void cmd_train(const RunContext& ctx);
void cmd_distill(const RunContext& ctx);
void cmd_eval(const RunContext& ctx);
void cmd_adapt_eval(const RunContext& ctx);
void cmd_bench(const RunContext& ctx);

/// synth (for synthetic sources), extract, train, distill, eval,
/// adapt-eval, bench.
void cmd_all(const RunContext& ctx);

}  // namespace mtnam
