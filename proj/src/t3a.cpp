#include "mtnam/t3a.hpp"

#include "mtnam/signal_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace mtnam {

AdapterState init_adapter(Eigen::Index dim, double h0) {
  if (dim <= 0) throw config_error("adapter dimension must be positive");
  if (!(h0 >= 0.0)) throw config_error("entropy threshold must be non-negative");
  AdapterState s;
  s.mu1 = VectorXd::Constant(dim, 1.0 / std::sqrt(double(dim)));
  s.mu0 = -s.mu1;
  s.h0 = h0;
  return s;
}

double entropy(double y_hat) {
  if (!(y_hat >= 0.0 && y_hat <= 1.0)) throw data_error("entropy: probability outside [0, 1]");
  auto term = [](double p) { return p > 0.0 ? p * std::log(p) : 0.0; };
  return -(term(y_hat) + term(1.0 - y_hat));
}

AdaptResult adapt_step(AdapterState& state, const VectorXd& contrib) {
  if (contrib.size() != state.dim()) throw data_error("adapt_step: contribution dimension mismatch");
  AdaptResult r;
  r.y_offline = sigmoid(contrib.sum());
  r.class_assigned = r.y_offline >= 0.5 ? 1 : 0;
  const double norm = contrib.norm();
  if (entropy(r.y_offline) < state.h0 && norm > 0.0) {
    r.accepted = true;
    auto& mu = r.class_assigned ? state.mu1 : state.mu0;
    auto& n = r.class_assigned ? state.n1 : state.n0;
    ++n;
    const double rate = 1.0 / double(n);
    mu = (1.0 - rate) * mu + (rate / norm) * contrib;
  }
  r.y_adapted = sigmoid(contrib.dot(state.mu1 - state.mu0));
  return r;
}

StreamOutput run_stream(const ForwardFn& forward, AdapterState& adapter, const FeatureMatrix& features) {
  StreamOutput out;
  const auto n = static_cast<std::size_t>(features.n_windows());
  out.y_offline.reserve(n);
  out.y_adapted.reserve(n);
  out.accepted.reserve(n);
  out.class_assigned.reserve(n);
  VectorXd x, contrib;
  for (Eigen::Index r = 0; r < features.n_windows(); ++r) {
    x = features.rows.row(r).transpose();
    forward(x, contrib);
    const auto step = adapt_step(adapter, contrib);
    out.y_offline.push_back(step.y_offline);
    out.y_adapted.push_back(step.y_adapted);
    out.accepted.push_back(step.accepted ? 1 : 0);
    out.class_assigned.push_back(step.class_assigned);
  }
  return out;
}

H0Result tune_h0(const ForwardFn& forward, const FeatureMatrix& val, const std::vector<double>& grid) {
  if (grid.empty()) throw config_error("entropy threshold grid is empty");
  H0Result result;
  double best_f1 = -1.0;
  for (double h0 : grid) {
    auto adapter = init_adapter(val.dim(), h0);
    const auto out = run_stream(forward, adapter, val);
    const double f1 = f1_weighted(out.y_adapted, val.labels, 0.5);
    result.report.push_back({h0, f1});
    if (f1 > best_f1 || (f1 == best_f1 && h0 > result.h0)) {
      best_f1 = f1;
      result.h0 = h0;
    }
  }
  return result;
}

std::vector<double> default_h0_grid() {
  constexpr int n = 20;
  const double lo = std::log(1e-4);
  const double hi = std::log(std::numbers::ln2);
  std::vector<double> grid;
  for (int i = 0; i < n; ++i) grid.push_back(std::exp(lo + (hi - lo) * double(i) / double(n - 1)));
  grid.back() = std::numbers::ln2;
  return grid;
}

std::string stream_csv_header() { return "window_start_s,label,y_offline,y_adapted,accepted,class_assigned"; }

void write_stream_csv(const std::string& path, const FeatureMatrix& fm, const StreamOutput& out,
                      const std::string& header_comment) {
  std::ofstream os(path);
  if (!os) throw missing_input("cannot write " + path);
  if (!header_comment.empty()) os << "# " << header_comment << '\n';
  os << stream_csv_header() << '\n';
  for (std::size_t i = 0; i < out.y_offline.size(); ++i) {
    os << format_double(fm.window_start_s[i]) << ',' << fm.labels[i] << ',' << format_double(out.y_offline[i]) << ','
       << format_double(out.y_adapted[i]) << ',' << out.accepted[i] << ',' << out.class_assigned[i] << '\n';
  }
}

}  // namespace mtnam
