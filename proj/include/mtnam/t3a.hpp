#pragma once

#include "mtnam/eval.hpp"
#include "mtnam/features.hpp"
#include "mtnam/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mtnam {

/// Running class centroids of unit-normalised contribution vectors. The
/// initial vectors +-1/sqrt(M) count as one member of each class.
template <typename Scalar>
struct BasicAdapterState {
  Vector<Scalar> mu0;
  Vector<Scalar> mu1;
  long n0{1};
  long n1{1};
  Scalar h0{0};

  Eigen::Index dim() const { return mu1.size(); }
};

using AdapterState = BasicAdapterState<double>;

/// mu1 = +1/sqrt(M) * 1, mu0 = -mu1, n0 = n1 = 1.
AdapterState init_adapter(Eigen::Index dim, double h0);

/// Binary entropy in nats with 0 log 0 = 0.
double entropy(double y_hat);

struct AdaptResult {
  double y_offline{0};
  double y_adapted{0};
  bool accepted{false};
  int class_assigned{0};
};

/// One online step: the offline prediction sigmoid(sum contrib) picks the
/// class at 0.5; when its entropy is strictly below h0 the unit-normalised
/// contribution vector joins that class's running mean. Returns
/// sigmoid(contrib . (mu1 - mu0)) with the updated centroids.
AdaptResult adapt_step(AdapterState& state, const VectorXd& contrib);

/// Produces the contribution vector of one (already scaled) window.
using ForwardFn = std::function<void(const VectorXd& x, VectorXd& contrib)>;

struct StreamOutput {
  std::vector<double> y_offline;
  std::vector<double> y_adapted;
  std::vector<int> accepted;
  std::vector<int> class_assigned;
};

/// Single chronological pass over the windows of `features`.
StreamOutput run_stream(const ForwardFn& forward, AdapterState& adapter, const FeatureMatrix& features);

struct H0Row {
  double h0;
  double f1;
};

struct H0Result {
  double h0{0};
  std::vector<H0Row> report;
};

/// Picks the threshold with the best adapted weighted F1 on `val`; ties go
/// to the larger threshold.
H0Result tune_h0(const ForwardFn& forward, const FeatureMatrix& val, const std::vector<double>& grid);

/// 20 log-spaced values from 1e-4 to ln 2.
std::vector<double> default_h0_grid();

std::string stream_csv_header();
void write_stream_csv(const std::string& path, const FeatureMatrix& fm, const StreamOutput& out,
                      const std::string& header_comment = {});

}  // namespace mtnam
