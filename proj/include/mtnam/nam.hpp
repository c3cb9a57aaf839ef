#pragma once

#include "mtnam/features.hpp"
#include "mtnam/rng.hpp"
#include "mtnam/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <string>
#include <vector>

namespace mtnam {

enum class Activation { ReLU, ExU };

const char* to_string(Activation a);
Activation parse_activation(const std::string& s);

/// Scalar-to-scalar network with one hidden layer of `hidden()` units.
///
/// ReLU unit u:  max(0, w_u * z + b_u)
/// ExU unit u:   clamp(exp(w_u) * (z - b_u), 0, 1)
///
/// The output is v . hidden + c.
template <typename Scalar>
struct BasicFeatureNet {
  Activation activation{Activation::ReLU};
  Vector<Scalar> w;
  Vector<Scalar> b;
  Vector<Scalar> v;
  Scalar c{0};

  Eigen::Index hidden() const { return w.size(); }

  template <typename Other>
  BasicFeatureNet<Other> cast() const {
    return {activation, w.template cast<Other>(), b.template cast<Other>(), v.template cast<Other>(), Other(c)};
  }
};

template <typename Scalar>
Scalar feature_forward(const BasicFeatureNet<Scalar>& net, Scalar z) {
  if (net.activation == Activation::ReLU) {
    return (net.w.array() * z + net.b.array()).cwiseMax(Scalar(0)).matrix().dot(net.v) + net.c;
  }
  return (net.w.array().exp() * (z - net.b.array())).cwiseMax(Scalar(0)).cwiseMin(Scalar(1)).matrix().dot(net.v) +
         net.c;
}

template <typename Scalar>
struct BasicNamModel {
  std::vector<BasicFeatureNet<Scalar>> nets;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(nets.size()); }

  template <typename Other>
  BasicNamModel<Other> cast() const {
    BasicNamModel<Other> out;
    for (const auto& n : nets) out.nets.push_back(n.template cast<Other>());
    return out;
  }
};

template <typename Scalar>
struct Prediction {
  Vector<Scalar> contrib;
  Scalar y_hat{0};
};

/// contrib_j = f_j(x_j); y_hat = sigmoid(sum_j contrib_j).
template <typename Scalar, typename Derived>
Prediction<Scalar> nam_forward(const BasicNamModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != model.dim()) throw data_error("nam_forward: input dimension mismatch");
  Prediction<Scalar> p;
  p.contrib.resize(model.dim());
  for (Eigen::Index j = 0; j < model.dim(); ++j) {
    p.contrib(j) = feature_forward(model.nets[static_cast<std::size_t>(j)], Scalar(x(j)));
  }
  p.y_hat = sigmoid(p.contrib.sum());
  return p;
}

/// Binary cross-entropy of one prediction, with log arguments floored so
/// that saturated outputs give a large finite loss.
template <typename Scalar>
Scalar bce(Scalar y_hat, int label) {
  using std::log;
  const Scalar tiny = std::numeric_limits<Scalar>::min();
  return label ? -log(std::max(y_hat, tiny)) : -log(std::max(Scalar(1) - y_hat, tiny));
}

struct NamArch {
  int hidden{100};
  Activation activation{Activation::ReLU};
};

struct TrainConfig {
  double learning_rate{1e-3};
  int epochs{200};
  int batch_size{128};
  double beta1{0.9};
  double beta2{0.999};
  double epsilon{1e-8};
  int downsample_ratio{10};
  std::uint64_t seed{0};
  int patience{20};
  double l2{0.0};  // used by logistic regression only

  void validate() const;
};

/// Teacher model with the scaler fitted on its training windows. Inputs to
/// the forward functions are already scaled.
struct NamModel {
  BasicNamModel<double> net;
  Scaler scaler;
  NamArch arch;
  TrainConfig cfg;

  Eigen::Index dim() const { return net.dim(); }
  Prediction<double> forward(const VectorXd& x) const { return nam_forward(net, x); }
};

/// Parameter initialisation: ReLU input weights U(-1, 1), output weights
/// U(-1/sqrt(h), 1/sqrt(h)), biases 0. ExU weights N(4, 0.5) and ExU
/// biases N(0, 0.5) so that the units' switching points are spread out.
BasicNamModel<double> init_nam(Eigen::Index dim, const NamArch& arch, Rng& rng);

/// Keeps every ictal row and min(ratio * n_ictal, n_nonictal) uniformly
/// chosen non-ictal rows, preserving row order.
FeatureMatrix downsample_nonictal(const FeatureMatrix& fm, int ratio, std::uint64_t seed);

/// Standard bias-corrected Adam over a flat parameter vector.
class Adam {
 public:
  Adam(Eigen::Index n, double lr, double beta1, double beta2, double eps);
  void step(VectorXd& params, const VectorXd& grad);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  VectorXd m_, v_;
  long t_{0};
};

// Flat parameter layout per net: w (h), b (h), v (h), c (1).
VectorXd flatten(const BasicNamModel<double>& m);
void unflatten(const VectorXd& flat, BasicNamModel<double>& m);

/// Mean BCE over the rows of X and, if `grad` is non-null, its gradient in
/// the flatten() layout.
double nam_loss(const BasicNamModel<double>& m, const MatrixXd& X, const std::vector<int>& y, VectorXd* grad);

VectorXd nam_predict(const BasicNamModel<double>& m, const MatrixXd& X);

struct EpochRecord {
  int epoch;
  double train_loss;
  double val_f1;
};

struct TrainReport {
  double initial_loss{0};
  double final_loss{0};
  int best_epoch{0};
  double best_val_f1{0};
  std::vector<EpochRecord> history;
};

/// Adam on mean BCE; returns the parameters of the epoch with the best
/// validation weighted F1, the latest one on ties (epoch 0 is the
/// initialisation). Inputs must be scaled; the caller attaches the scaler.
NamModel train_nam(const FeatureMatrix& train, const FeatureMatrix& val, const TrainConfig& cfg, const NamArch& arch,
                   TrainReport* report = nullptr);

struct NamCandidate {
  NamArch arch;
  TrainConfig cfg;
};

struct GridRow {
  NamCandidate candidate;
  double val_f1;
};

struct GridResult {
  NamCandidate best;
  NamModel model;
  std::vector<GridRow> report;
};

/// Trains every candidate and keeps the best validation F1. Ties go to
/// the smaller hidden width, then ReLU before ExU.
GridResult grid_search(const std::vector<NamCandidate>& space, const FeatureMatrix& train, const FeatureMatrix& val);

/// Hidden widths {10, 50, 100, 200} x {ReLU, ExU}.
std::vector<NamCandidate> default_nam_space(const TrainConfig& cfg);

// --- baselines ---------------------------------------------------------

/// Logistic regression: sigmoid(w . x + b), with (l2 / 2) * |w|^2 added to
/// the mean BCE.
struct LrModel {
  VectorXd w;
  double b{0};
  double l2{0};
  Scaler scaler;

  double predict(const VectorXd& x) const { return sigmoid(w.dot(x) + b); }
};

enum class DnnActivation { ReLU, LeakyReLU };

/// One-hidden-layer MLP over the full feature vector.
struct DnnModel {
  MatrixXd W1;  // hidden x dim
  VectorXd b1;
  VectorXd w2;
  double b2{0};
  DnnActivation activation{DnnActivation::ReLU};
  Scaler scaler;

  double predict(const VectorXd& x) const;
};

double lr_loss(const LrModel& m, const MatrixXd& X, const std::vector<int>& y, VectorXd* grad);
VectorXd flatten(const LrModel& m);
void unflatten(const VectorXd& flat, LrModel& m);

double dnn_loss(const DnnModel& m, const MatrixXd& X, const std::vector<int>& y, VectorXd* grad);
VectorXd flatten(const DnnModel& m);
void unflatten(const VectorXd& flat, DnnModel& m);

LrModel train_lr(const FeatureMatrix& train, const FeatureMatrix& val, const TrainConfig& cfg,
                 TrainReport* report = nullptr);
DnnModel train_dnn(const FeatureMatrix& train, const FeatureMatrix& val, const TrainConfig& cfg, int hidden,
                   DnnActivation act = DnnActivation::ReLU, TrainReport* report = nullptr);

}  // namespace mtnam
