#pragma once

#include "mtnam/nam.hpp"
#include "mtnam/types.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace mtnam {

/// Depth-bounded CART regression tree over a scalar input. Nodes are
/// stored in pre-order; node 0 is the root.
struct RegressionTree {
  struct Node {
    bool leaf{true};
    double threshold{0.0};  // internal: z <= threshold goes left
    double value{0.0};      // leaf: mean target
    int left{-1};
    int right{-1};
  };

  std::vector<Node> nodes;
  int max_depth{0};

  int depth() const;
  double predict(double z) const;
};

struct TreeSample {
  double z;
  double t;
};

/// Greedy least-squares CART. Candidate thresholds are midpoints between
/// consecutive distinct inputs; among equal-SSE candidates the smallest
/// threshold wins. A node stops splitting at max_depth, when its targets
/// are all equal, or when it has a single distinct input.
RegressionTree fit_regression_tree(std::span<const TreeSample> samples, int max_depth);

inline double tree_predict(const RegressionTree& tree, double z) { return tree.predict(z); }

/// Trees laid out as complete binary trees of depth d in flat arrays, so
/// that a prediction is d branch-free comparisons. Early leaves are padded
/// with +inf thresholds.
class PackedTrees {
 public:
  PackedTrees() = default;
  PackedTrees(const std::vector<RegressionTree>& trees, int depth);

  template <typename Derived>
  double predict(Eigen::Index j, const Eigen::MatrixBase<Derived>& x) const {
    return predict(j, double(x(j)));
  }
  double predict(Eigen::Index j, double z) const {
    const double* thr = thresholds_.data() + j * n_internal_;
    std::size_t idx = 0;
    for (int level = 0; level < depth_; ++level) idx = 2 * idx + 1 + static_cast<std::size_t>(z > thr[idx]);
    return leaves_[static_cast<std::size_t>(j) * n_leaves_ + (idx - n_internal_)];
  }

  /// Writes every tree's prediction for input row x into contrib and
  /// returns their sum.
  double predict_all(const double* x, double* contrib) const;

  Eigen::Index dim() const { return dim_; }

 private:
  template <int Depth>
  double predict_all_fixed(const double* x, double* contrib) const;

  int depth_{0};
  Eigen::Index dim_{0};
  std::size_t n_internal_{0};
  std::size_t n_leaves_{1};
  std::vector<double> thresholds_;
  std::vector<double> leaves_;
};

struct MtNamModel {
  std::vector<RegressionTree> trees;
  int depth{0};
  std::uint64_t teacher_hash{0};
  Scaler scaler;

  MtNamModel() = default;
  MtNamModel(std::vector<RegressionTree> trees, int depth, std::uint64_t teacher_hash, Scaler scaler);

  Eigen::Index dim() const { return static_cast<Eigen::Index>(trees.size()); }
  const PackedTrees& packed() const { return packed_; }
  Prediction<double> forward(const VectorXd& x) const;

 private:
  PackedTrees packed_;
};

/// Stable fingerprint of the teacher's parameters.
std::uint64_t model_fingerprint(const NamModel& m);

/// Fits one tree per feature to (x_j, f_j(x_j)) over the rows of
/// `train_inputs`, which must already be scaled.
MtNamModel distill(const NamModel& teacher, const FeatureMatrix& train_inputs, int depth);

/// Writes contrib_j = tree_j(x_j) into `contrib` and returns
/// sigmoid(sum contrib).
double mtnam_forward_into(const MtNamModel& model, const VectorXd& x, VectorXd& contrib);

inline Prediction<double> mtnam_forward(const MtNamModel& model, const VectorXd& x) { return model.forward(x); }

VectorXd mtnam_predict(const MtNamModel& model, const MatrixXd& X);

}  // namespace mtnam
