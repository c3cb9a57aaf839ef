#include "mtnam/mtnam.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace mtnam {

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  // Pre-order storage: walk with an explicit stack of (node, depth).
  int deepest = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    const auto& n = nodes[static_cast<std::size_t>(i)];
    if (n.leaf) {
      deepest = std::max(deepest, d);
    } else {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return deepest;
}

double RegressionTree::predict(double z) const {
  std::size_t i = 0;
  while (!nodes[i].leaf) i = static_cast<std::size_t>(z <= nodes[i].threshold ? nodes[i].left : nodes[i].right);
  return nodes[i].value;
}

namespace {

struct TreeBuilder {
  std::span<const TreeSample> s;  // sorted by z
  int max_depth;
  RegressionTree tree;

  int build(std::size_t begin, std::size_t end, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    double sum = 0.0;
    double t_min = std::numeric_limits<double>::infinity();
    double t_max = -t_min;
    for (std::size_t i = begin; i < end; ++i) {
      sum += s[i].t;
      t_min = std::min(t_min, s[i].t);
      t_max = std::max(t_max, s[i].t);
    }
    const double n = double(end - begin);
    const double mean = sum / n;
    tree.nodes[static_cast<std::size_t>(id)].value = mean;

    if (depth >= max_depth || t_min == t_max || s[begin].z == s[end - 1].z) return id;

    // SSE(left) + SSE(right) = SSE(node) - (S_L^2 / n_L + S_R^2 / n_R) with
    // targets centred on the node mean, so the best split maximises the gain.
    double total_sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) total_sq += (s[i].t - mean) * (s[i].t - mean);
    const double tol = 1e-12 * std::max(1.0, total_sq);

    double centred_total = 0.0;
    for (std::size_t i = begin; i < end; ++i) centred_total += s[i].t - mean;

    double best_gain = -std::numeric_limits<double>::infinity();
    std::size_t best_cut = 0;  // first index of the right child
    double left_sum = 0.0;
    for (std::size_t i = begin; i + 1 < end; ++i) {
      left_sum += s[i].t - mean;
      if (s[i].z == s[i + 1].z) continue;
      const double n_left = double(i + 1 - begin);
      const double n_right = n - n_left;
      const double right_sum = centred_total - left_sum;
      const double gain = left_sum * left_sum / n_left + right_sum * right_sum / n_right;
      if (gain > best_gain + tol) {
        best_gain = gain;
        best_cut = i + 1;
      }
    }

    const double lo = s[best_cut - 1].z;
    const double hi = s[best_cut].z;
    double threshold = (lo + hi) / 2.0;
    if (!(threshold < hi)) threshold = lo;

    const int left = build(begin, best_cut, depth + 1);
    const int right = build(best_cut, end, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.leaf = false;
    node.threshold = threshold;
    node.left = left;
    node.right = right;
    return id;
  }
};

}  // namespace

RegressionTree fit_regression_tree(std::span<const TreeSample> samples, int max_depth) {
  if (samples.empty()) throw data_error("cannot fit a regression tree to no samples");
  if (max_depth < 0) throw config_error("tree depth must be non-negative");
  std::vector<TreeSample> sorted(samples.begin(), samples.end());
  for (const auto& p : sorted) {
    if (!std::isfinite(p.z) || !std::isfinite(p.t)) throw data_error("regression tree samples must be finite");
  }
  std::sort(sorted.begin(), sorted.end(), [](const TreeSample& a, const TreeSample& b) {
    return a.z < b.z || (a.z == b.z && a.t < b.t);
  });
  TreeBuilder b{sorted, max_depth, {}};
  b.tree.max_depth = max_depth;
  b.build(0, sorted.size(), 0);
  return std::move(b.tree);
}

// --- packed layout -------------------------------------------------------

PackedTrees::PackedTrees(const std::vector<RegressionTree>& trees, int depth)
    : depth_(depth),
      dim_(static_cast<Eigen::Index>(trees.size())),
      n_internal_((std::size_t{1} << depth) - 1),
      n_leaves_(std::size_t{1} << depth),
      thresholds_(trees.size() * n_internal_, std::numeric_limits<double>::infinity()),
      leaves_(trees.size() * n_leaves_, 0.0) {
  for (std::size_t j = 0; j < trees.size(); ++j) {
    const auto& tree = trees[j];
    if (tree.depth() > depth) throw data_error("tree deeper than the packed layout");
    double* thr = thresholds_.data() + j * n_internal_;
    double* leaf = leaves_.data() + j * n_leaves_;
    // (tree node, heap index, level)
    std::vector<std::tuple<int, std::size_t, int>> stack{{0, 0, 0}};
    while (!stack.empty()) {
      const auto [node_id, heap, level] = stack.back();
      stack.pop_back();
      const auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
      if (node.leaf) {
        // Every packed leaf under this heap slot carries the value; +inf
        // thresholds route to the leftmost one.
        const std::size_t span = std::size_t{1} << (depth - level);
        std::size_t first = heap;
        for (int l = level; l < depth; ++l) first = 2 * first + 1;
        for (std::size_t k = 0; k < span; ++k) leaf[first - n_internal_ + k] = node.value;
        continue;
      }
      thr[heap] = node.threshold;
      stack.emplace_back(node.left, 2 * heap + 1, level + 1);
      stack.emplace_back(node.right, 2 * heap + 2, level + 1);
    }
  }
}

// Depth as a template parameter lets the compiler unroll the descent, which
// keeps the per-tree work to a handful of independent loads.
template <int Depth>
double PackedTrees::predict_all_fixed(const double* x, double* contrib) const {
  constexpr std::size_t n_internal = (std::size_t{1} << Depth) - 1;
  constexpr std::size_t n_leaves = std::size_t{1} << Depth;
  const double* thr = thresholds_.data();
  const double* leaf = leaves_.data();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < dim_; ++j, thr += n_internal, leaf += n_leaves) {
    const double z = x[j];
    std::size_t idx = 0;
    for (int level = 0; level < Depth; ++level) idx = 2 * idx + 1 + static_cast<std::size_t>(z > thr[idx]);
    contrib[j] = leaf[idx - n_internal];
    sum += contrib[j];
  }
  return sum;
}

double PackedTrees::predict_all(const double* x, double* contrib) const {
  switch (depth_) {
    case 0: return predict_all_fixed<0>(x, contrib);
    case 1: return predict_all_fixed<1>(x, contrib);
    case 2: return predict_all_fixed<2>(x, contrib);
    case 3: return predict_all_fixed<3>(x, contrib);
    case 4: return predict_all_fixed<4>(x, contrib);
    case 5: return predict_all_fixed<5>(x, contrib);
    case 6: return predict_all_fixed<6>(x, contrib);
    default: break;
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < dim_; ++j) {
    contrib[j] = predict(j, x[j]);
    sum += contrib[j];
  }
  return sum;
}

MtNamModel::MtNamModel(std::vector<RegressionTree> trees_in, int depth_in, std::uint64_t teacher, Scaler scaler_in)
    : trees(std::move(trees_in)),
      depth(depth_in),
      teacher_hash(teacher),
      scaler(std::move(scaler_in)),
      packed_(trees, depth_in) {}

double mtnam_forward_into(const MtNamModel& model, const VectorXd& x, VectorXd& contrib) {
  const auto& packed = model.packed();
  if (x.size() != packed.dim()) throw data_error("mtnam_forward: input dimension mismatch");
  contrib.resize(packed.dim());
  return sigmoid(packed.predict_all(x.data(), contrib.data()));
}

Prediction<double> MtNamModel::forward(const VectorXd& x) const {
  Prediction<double> p;
  p.y_hat = mtnam_forward_into(*this, x, p.contrib);
  return p;
}

VectorXd mtnam_predict(const MtNamModel& model, const MatrixXd& X) {
  VectorXd out(X.rows());
  VectorXd contrib;
  for (Eigen::Index r = 0; r < X.rows(); ++r) out(r) = mtnam_forward_into(model, X.row(r).transpose(), contrib);
  return out;
}

std::uint64_t model_fingerprint(const NamModel& m) {
  const VectorXd flat = flatten(m.net);
  std::string bytes(static_cast<std::size_t>(flat.size()) * sizeof(double), '\0');
  std::memcpy(bytes.data(), flat.data(), bytes.size());
  for (const auto& net : m.net.nets) bytes.push_back(net.activation == Activation::ReLU ? 'r' : 'e');
  return fnv1a(bytes);
}

MtNamModel distill(const NamModel& teacher, const FeatureMatrix& train_inputs, int depth) {
  if (train_inputs.n_windows() == 0) throw data_error("distillation needs at least one training window");
  if (train_inputs.dim() != teacher.dim()) throw data_error("distillation inputs do not match the teacher dimension");
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(teacher.dim()));
  std::vector<TreeSample> samples(static_cast<std::size_t>(train_inputs.n_windows()));
  for (Eigen::Index j = 0; j < teacher.dim(); ++j) {
    const auto& net = teacher.net.nets[static_cast<std::size_t>(j)];
    for (Eigen::Index r = 0; r < train_inputs.n_windows(); ++r) {
      const double z = train_inputs.rows(r, j);
      samples[static_cast<std::size_t>(r)] = {z, feature_forward(net, z)};
    }
    trees.push_back(fit_regression_tree(samples, depth));
  }
  return MtNamModel(std::move(trees), depth, model_fingerprint(teacher), teacher.scaler);
}

}  // namespace mtnam
