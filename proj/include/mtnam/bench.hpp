#pragma once

#include "mtnam/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mtnam {

/// Counting rules, version 1. A linear map in -> out costs 2 * in * out,
/// an activation 1 per unit, a comparison 1, an addition 1, a sigmoid 4,
/// normalising an M-vector 3M + 2 and a dot product of length M 2M.
namespace flop_rules {
inline constexpr int kVersion = 1;
inline constexpr std::int64_t kSigmoid = 4;
inline constexpr std::int64_t linear(std::int64_t in, std::int64_t out) { return 2 * in * out; }
inline constexpr std::int64_t normalize(std::int64_t m) { return 3 * m + 2; }
inline constexpr std::int64_t dot(std::int64_t m) { return 2 * m; }
}  // namespace flop_rules

enum class ModelKind { Nam, MtNam, Lr, Dnn };

struct ModelDescriptor {
  ModelKind kind{ModelKind::Nam};
  std::int64_t dim{0};     // M
  std::int64_t hidden{0};  // h for NAM and DNN
  int depth{0};            // d for MT-NAM
  bool adapter{false};     // T3A on top
};

/// FLOPs of one single-window inference under the rules above.
std::int64_t count_flops(const ModelDescriptor& desc);

/// Extra FLOPs the T3A step adds to a model of dimension M.
std::int64_t t3a_flops(std::int64_t dim);

struct LatencyReport {
  std::string model;
  double mean_us{0};
  double std_us{0};
  double min_us{0};
  int repetitions{0};
  int warmups{0};
  long inner{1};  // forwards timed per repetition
};

/// Times single-window forwards on the monotonic clock. Each repetition
/// runs `inner` consecutive forwards (cycling through the inputs) and
/// records the per-forward mean; `inner` is calibrated so that one
/// repetition lasts at least `min_rep_us`. Warm-up repetitions are
/// discarded.
LatencyReport measure_latency(const std::string& model, const std::function<double(std::size_t)>& forward,
                              std::size_t n_inputs, int repetitions = 30, int warmups = 5, double min_rep_us = 200.0);

struct BenchRow {
  std::string model;
  std::int64_t flops;
  LatencyReport latency;
};

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& row, const std::string& host_tag);

}  // namespace mtnam
