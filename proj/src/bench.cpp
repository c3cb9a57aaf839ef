#include "mtnam/bench.hpp"

#include "mtnam/signal_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace mtnam {

std::int64_t t3a_flops(std::int64_t dim) {
  using namespace flop_rules;
  const std::int64_t entropy = 2 * kSigmoid + 3;  // two logs, two products, one sum
  const std::int64_t centroid_update = 3 * dim;    // scale old, scale new, add
  const std::int64_t centroid_diff = dim;
  return normalize(dim) + entropy + centroid_update + centroid_diff + dot(dim) + kSigmoid;
}

std::int64_t count_flops(const ModelDescriptor& d) {
  using namespace flop_rules;
  if (d.dim <= 0) throw config_error("FLOP count needs a positive input dimension");
  std::int64_t base = 0;
  switch (d.kind) {
    case ModelKind::Nam:
      if (d.hidden <= 0) throw config_error("NAM FLOP count needs a hidden width");
      // per feature: 1 -> h map, h activations, h -> 1 map
      base = d.dim * (linear(1, d.hidden) + d.hidden + linear(d.hidden, 1)) + (d.dim - 1) + kSigmoid;
      break;
    case ModelKind::MtNam:
      if (d.depth <= 0) throw config_error("MT-NAM FLOP count needs a tree depth");
      base = d.dim * d.depth + (d.dim - 1) + kSigmoid;
      break;
    case ModelKind::Lr:
      base = linear(d.dim, 1) + kSigmoid;
      break;
    case ModelKind::Dnn:
      if (d.hidden <= 0) throw config_error("DNN FLOP count needs a hidden width");
      base = linear(d.dim, d.hidden) + d.hidden + linear(d.hidden, 1) + kSigmoid;
      break;
    default:
      throw config_error("unknown model descriptor");
  }
  return d.adapter ? base + t3a_flops(d.dim) : base;
}

LatencyReport measure_latency(const std::string& model, const std::function<double(std::size_t)>& forward,
                              std::size_t n_inputs, int repetitions, int warmups, double min_rep_us) {
  if (n_inputs == 0) throw config_error("latency measurement needs at least one input");
  if (repetitions < 30 || warmups < 5) throw config_error("latency needs R >= 30 and W >= 5");
  using clock = std::chrono::steady_clock;
  volatile double sink = 0.0;
  std::size_t cursor = 0;

  auto run = [&](long count) {
    const auto t0 = clock::now();
    for (long k = 0; k < count; ++k) {
      sink = sink + forward(cursor);
      if (++cursor == n_inputs) cursor = 0;
    }
    return std::chrono::duration<double, std::micro>(clock::now() - t0).count();
  };

  long inner = 1;
  while (run(inner) < min_rep_us && inner < (1L << 24)) inner *= 2;

  for (int w = 0; w < warmups; ++w) run(inner);
  std::vector<double> per_call;
  per_call.reserve(static_cast<std::size_t>(repetitions));
  for (int r = 0; r < repetitions; ++r) per_call.push_back(run(inner) / double(inner));

  LatencyReport rep;
  rep.model = model;
  rep.repetitions = repetitions;
  rep.warmups = warmups;
  rep.inner = inner;
  double sum = 0.0;
  for (double t : per_call) sum += t;
  rep.mean_us = sum / double(repetitions);
  double sq = 0.0;
  for (double t : per_call) sq += (t - rep.mean_us) * (t - rep.mean_us);
  rep.std_us = std::sqrt(sq / double(repetitions));
  rep.min_us = *std::min_element(per_call.begin(), per_call.end());
  return rep;
}

std::string bench_csv_header() { return "model,flops,lat_mean_us,lat_std_us,lat_min_us,R,W,host_tag"; }

std::string bench_csv_row(const BenchRow& row, const std::string& host_tag) {
  std::ostringstream os;
  os << row.model << ',' << row.flops << ',' << format_double(row.latency.mean_us) << ','
     << format_double(row.latency.std_us) << ',' << format_double(row.latency.min_us) << ',' << row.latency.repetitions
     << ',' << row.latency.warmups << ',' << host_tag;
  return os.str();
}

}  // namespace mtnam
