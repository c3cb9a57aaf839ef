#include "mtnam/nam.hpp"

#include "mtnam/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>

namespace mtnam {

const char* to_string(Activation a) { return a == Activation::ReLU ? "relu" : "exu"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu" || s == "ReLU") return Activation::ReLU;
  if (s == "exu" || s == "ExU" || s == "EXU") return Activation::ExU;
  throw config_error("unknown activation '" + s + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw config_error("learning rate must be positive");
  if (epochs < 0) throw config_error("epochs must be non-negative");
  if (batch_size <= 0) throw config_error("batch size must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) throw config_error("Adam betas must lie in (0,1)");
  if (!(epsilon > 0.0)) throw config_error("Adam epsilon must be positive");
  if (downsample_ratio < 1) throw config_error("downsample ratio must be at least 1");
  if (patience <= 0) throw config_error("patience must be positive");
  if (l2 < 0.0) throw config_error("l2 penalty must be non-negative");
}

BasicNamModel<double> init_nam(Eigen::Index dim, const NamArch& arch, Rng& rng) {
  if (dim <= 0) throw config_error("NAM needs at least one input feature");
  if (arch.hidden <= 0) throw config_error("hidden width must be positive");
  const Eigen::Index h = arch.hidden;
  std::uniform_real_distribution<double> in_w(-1.0, 1.0);
  const double out_bound = 1.0 / std::sqrt(double(h));
  std::uniform_real_distribution<double> out_w(-out_bound, out_bound);
  std::normal_distribution<double> exu_w(4.0, 0.5);
  std::normal_distribution<double> exu_b(0.0, 0.5);

  BasicNamModel<double> m;
  m.nets.resize(static_cast<std::size_t>(dim));
  for (auto& net : m.nets) {
    net.activation = arch.activation;
    net.w.resize(h);
    net.b.resize(h);
    net.v.resize(h);
    for (Eigen::Index u = 0; u < h; ++u) {
      if (arch.activation == Activation::ReLU) {
        net.w(u) = in_w(rng);
        net.b(u) = 0.0;
      } else {
        net.w(u) = exu_w(rng);
        net.b(u) = exu_b(rng);
      }
    }
    for (Eigen::Index u = 0; u < h; ++u) net.v(u) = out_w(rng);
    net.c = 0.0;
  }
  return m;
}

FeatureMatrix downsample_nonictal(const FeatureMatrix& fm, int ratio, std::uint64_t seed) {
  if (ratio < 1) throw config_error("downsample ratio must be at least 1");
  std::vector<Eigen::Index> ictal, nonictal;
  for (Eigen::Index r = 0; r < fm.n_windows(); ++r) {
    (fm.labels[static_cast<std::size_t>(r)] == 1 ? ictal : nonictal).push_back(r);
  }
  if (ictal.empty()) throw data_error("cannot downsample: no ictal windows");
  const std::size_t keep = std::min(static_cast<std::size_t>(ratio) * ictal.size(), nonictal.size());
  auto rng = make_rng(seed, "downsample");
  std::shuffle(nonictal.begin(), nonictal.end(), rng);
  nonictal.resize(keep);

  std::vector<Eigen::Index> rows = ictal;
  rows.insert(rows.end(), nonictal.begin(), nonictal.end());
  std::sort(rows.begin(), rows.end());
  return fm.select(rows);
}

Adam::Adam(Eigen::Index n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(VectorXd::Zero(n)), v_(VectorXd::Zero(n)) {}

void Adam::step(VectorXd& params, const VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, double(t_));
  const double c2 = 1.0 - std::pow(beta2_, double(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

// --- NAM parameters and gradients ---------------------------------------

VectorXd flatten(const BasicNamModel<double>& m) {
  Eigen::Index total = 0;
  for (const auto& n : m.nets) total += 3 * n.hidden() + 1;
  VectorXd flat(total);
  Eigen::Index o = 0;
  for (const auto& n : m.nets) {
    const auto h = n.hidden();
    flat.segment(o, h) = n.w;
    flat.segment(o + h, h) = n.b;
    flat.segment(o + 2 * h, h) = n.v;
    flat(o + 3 * h) = n.c;
    o += 3 * h + 1;
  }
  return flat;
}

void unflatten(const VectorXd& flat, BasicNamModel<double>& m) {
  Eigen::Index o = 0;
  for (auto& n : m.nets) {
    const auto h = n.hidden();
    n.w = flat.segment(o, h);
    n.b = flat.segment(o + h, h);
    n.v = flat.segment(o + 2 * h, h);
    n.c = flat(o + 3 * h);
    o += 3 * h + 1;
  }
}

namespace {

using ArrayXXd = Eigen::ArrayXXd;

// Pre-activations (n x h) of one feature net for a column of inputs.
ArrayXXd pre_activation(const BasicFeatureNet<double>& net, const VectorXd& z) {
  if (net.activation == Activation::ReLU) {
    return ((z * net.w.transpose()).rowwise() + net.b.transpose()).array();
  }
  const Eigen::RowVectorXd scale = net.w.array().exp().matrix().transpose();
  return ((z.replicate(1, net.hidden()).rowwise() - net.b.transpose()).array().rowwise() * scale.array());
}

ArrayXXd activate(const BasicFeatureNet<double>& net, const ArrayXXd& pre) {
  if (net.activation == Activation::ReLU) return pre.cwiseMax(0.0);
  return pre.cwiseMax(0.0).cwiseMin(1.0);
}

double mean_bce(const VectorXd& logits, const std::vector<int>& y, VectorXd* dlogit) {
  const auto n = logits.size();
  double loss = 0.0;
  if (dlogit) dlogit->resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = sigmoid(logits(i));
    const int label = y[static_cast<std::size_t>(i)];
    loss += bce(p, label);
    if (dlogit) (*dlogit)(i) = (p - label) / double(n);
  }
  return loss / double(n);
}

}  // namespace

VectorXd nam_predict(const BasicNamModel<double>& m, const MatrixXd& X) {
  if (X.cols() != m.dim()) throw data_error("nam_predict: input dimension mismatch");
  VectorXd logits = VectorXd::Zero(X.rows());
  for (Eigen::Index j = 0; j < m.dim(); ++j) {
    const auto& net = m.nets[static_cast<std::size_t>(j)];
    logits += activate(net, pre_activation(net, X.col(j))).matrix() * net.v;
    logits.array() += net.c;
  }
  return logits.unaryExpr([](double t) { return sigmoid(t); });
}

double nam_loss(const BasicNamModel<double>& m, const MatrixXd& X, const std::vector<int>& y, VectorXd* grad) {
  if (X.cols() != m.dim()) throw data_error("nam_loss: input dimension mismatch");
  if (X.rows() == 0 || static_cast<std::size_t>(X.rows()) != y.size()) throw data_error("nam_loss: bad batch");
  const auto n = X.rows();

  std::vector<ArrayXXd> pre(m.nets.size()), act(m.nets.size());
  VectorXd logits = VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < m.dim(); ++j) {
    const auto& net = m.nets[static_cast<std::size_t>(j)];
    auto& p = pre[static_cast<std::size_t>(j)];
    auto& a = act[static_cast<std::size_t>(j)];
    p = pre_activation(net, X.col(j));
    a = activate(net, p);
    logits += a.matrix() * net.v;
    logits.array() += net.c;
  }
  VectorXd g;
  const double loss = mean_bce(logits, y, grad ? &g : nullptr);
  if (!grad) return loss;

  grad->resize(flatten(m).size());
  Eigen::Index o = 0;
  for (Eigen::Index j = 0; j < m.dim(); ++j) {
    const auto& net = m.nets[static_cast<std::size_t>(j)];
    const auto h = net.hidden();
    const auto& p = pre[static_cast<std::size_t>(j)];
    const auto& a = act[static_cast<std::size_t>(j)];
    const VectorXd z = X.col(j);

    ArrayXXd dpre = (g * net.v.transpose()).array();
    if (net.activation == Activation::ReLU) {
      dpre *= (p > 0.0).cast<double>();
      grad->segment(o, h) = dpre.matrix().transpose() * z;
      grad->segment(o + h, h) = dpre.colwise().sum().transpose();
    } else {
      dpre *= ((p > 0.0) && (p < 1.0)).cast<double>();
      grad->segment(o, h) = (dpre * p).colwise().sum().transpose();
      grad->segment(o + h, h) = -(dpre.colwise().sum().transpose() * net.w.array().exp()).matrix();
    }
    grad->segment(o + 2 * h, h) = a.matrix().transpose() * g;
    (*grad)(o + 3 * h) = g.sum();
    o += 3 * h + 1;
  }
  return loss;
}

// --- baselines ---------------------------------------------------------

double DnnModel::predict(const VectorXd& x) const {
  VectorXd hidden = W1 * x + b1;
  if (activation == DnnActivation::ReLU) {
    hidden = hidden.cwiseMax(0.0);
  } else {
    hidden = hidden.unaryExpr([](double t) { return t > 0.0 ? t : 0.01 * t; });
  }
  return sigmoid(w2.dot(hidden) + b2);
}

VectorXd flatten(const LrModel& m) {
  VectorXd flat(m.w.size() + 1);
  flat.head(m.w.size()) = m.w;
  flat(m.w.size()) = m.b;
  return flat;
}

void unflatten(const VectorXd& flat, LrModel& m) {
  m.w = flat.head(m.w.size());
  m.b = flat(m.w.size());
}

double lr_loss(const LrModel& m, const MatrixXd& X, const std::vector<int>& y, VectorXd* grad) {
  if (X.cols() != m.w.size()) throw data_error("lr_loss: input dimension mismatch");
  const VectorXd logits = (X * m.w).array() + m.b;
  VectorXd g;
  const double loss = mean_bce(logits, y, grad ? &g : nullptr) + 0.5 * m.l2 * m.w.squaredNorm();
  if (grad) {
    grad->resize(m.w.size() + 1);
    grad->head(m.w.size()) = X.transpose() * g + m.l2 * m.w;
    (*grad)(m.w.size()) = g.sum();
  }
  return loss;
}

VectorXd flatten(const DnnModel& m) {
  const auto h = m.W1.rows();
  const auto d = m.W1.cols();
  VectorXd flat(h * d + 2 * h + 1);
  flat.head(h * d) = Eigen::Map<const VectorXd>(m.W1.data(), h * d);
  flat.segment(h * d, h) = m.b1;
  flat.segment(h * d + h, h) = m.w2;
  flat(h * d + 2 * h) = m.b2;
  return flat;
}

void unflatten(const VectorXd& flat, DnnModel& m) {
  const auto h = m.W1.rows();
  const auto d = m.W1.cols();
  m.W1 = Eigen::Map<const MatrixXd>(flat.data(), h, d);
  m.b1 = flat.segment(h * d, h);
  m.w2 = flat.segment(h * d + h, h);
  m.b2 = flat(h * d + 2 * h);
}

double dnn_loss(const DnnModel& m, const MatrixXd& X, const std::vector<int>& y, VectorXd* grad) {
  if (X.cols() != m.W1.cols()) throw data_error("dnn_loss: input dimension mismatch");
  const double leak = m.activation == DnnActivation::ReLU ? 0.0 : 0.01;
  const ArrayXXd pre = ((X * m.W1.transpose()).rowwise() + m.b1.transpose()).array();
  const ArrayXXd hidden = (pre > 0.0).select(pre, leak * pre);
  const VectorXd logits = (hidden.matrix() * m.w2).array() + m.b2;
  VectorXd g;
  const double loss = mean_bce(logits, y, grad ? &g : nullptr);
  if (grad) {
    const auto h = m.W1.rows();
    const auto d = m.W1.cols();
    const ArrayXXd slope = (pre > 0.0).select(ArrayXXd::Ones(pre.rows(), pre.cols()), leak);
    const MatrixXd dpre = ((g * m.w2.transpose()).array() * slope).matrix();
    const MatrixXd dW1 = dpre.transpose() * X;
    grad->resize(h * d + 2 * h + 1);
    grad->head(h * d) = Eigen::Map<const VectorXd>(dW1.data(), h * d);
    grad->segment(h * d, h) = dpre.colwise().sum().transpose();
    grad->segment(h * d + h, h) = hidden.matrix().transpose() * g;
    (*grad)(h * d + 2 * h) = g.sum();
  }
  return loss;
}

// --- shared Adam trainer -------------------------------------------------

namespace {

void check_training_sets(const FeatureMatrix& train, const FeatureMatrix& val) {
  if (train.n_windows() == 0 || val.n_windows() == 0) throw data_error("training and validation sets must be non-empty");
  if (train.dim() != val.dim()) throw data_error("training and validation feature dimensions differ");
  const auto n_ictal = train.count_ictal();
  if (n_ictal == 0 || n_ictal == train.n_windows()) throw data_error("training set must contain both classes");
}

double val_f1(const VectorXd& scores, const FeatureMatrix& val) {
  return f1_weighted(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), val.labels, 0.5);
}

template <typename Model, typename LossFn, typename PredictFn>
void fit_adam(Model& model, const FeatureMatrix& train, const FeatureMatrix& val, const TrainConfig& cfg, LossFn loss_fn,
              PredictFn predict_fn, TrainReport* report) {
  cfg.validate();
  check_training_sets(train, val);
  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = {};

  VectorXd theta = flatten(model);
  Adam adam(theta.size(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
  auto shuffle_rng = make_rng(cfg.seed, "shuffle");

  rep.initial_loss = loss_fn(model, train.rows, train.labels, nullptr);
  rep.final_loss = rep.initial_loss;
  VectorXd best = theta;
  rep.best_val_f1 = val_f1(predict_fn(model, val.rows), val);
  rep.best_epoch = 0;

  const auto n = static_cast<std::size_t>(train.n_windows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  VectorXd grad;
  MatrixXd xb;
  std::vector<int> yb;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      xb.resize(static_cast<Eigen::Index>(stop - start), train.dim());
      yb.resize(stop - start);
      for (std::size_t k = start; k < stop; ++k) {
        xb.row(static_cast<Eigen::Index>(k - start)) = train.rows.row(static_cast<Eigen::Index>(order[k]));
        yb[k - start] = train.labels[order[k]];
      }
      loss_fn(model, xb, yb, &grad);
      if (!grad.allFinite()) throw numeric_error("training diverged: non-finite gradient at epoch " + std::to_string(epoch));
      adam.step(theta, grad);
      unflatten(theta, model);
    }
    const double loss = loss_fn(model, train.rows, train.labels, nullptr);
    if (!std::isfinite(loss)) throw numeric_error("training diverged: loss is NaN at epoch " + std::to_string(epoch));
    const double f1 = val_f1(predict_fn(model, val.rows), val);
    rep.history.push_back({epoch, loss, f1});
    rep.final_loss = loss;
    // Ties move to the later, better-converged epoch.
    if (f1 >= rep.best_val_f1) {
      rep.best_val_f1 = f1;
      rep.best_epoch = epoch;
      best = theta;
    } else if (epoch - rep.best_epoch >= cfg.patience) {
      break;
    }
  }
  unflatten(best, model);
}

}  // namespace

NamModel train_nam(const FeatureMatrix& train, const FeatureMatrix& val, const TrainConfig& cfg, const NamArch& arch,
                   TrainReport* report) {
  auto rng = make_rng(cfg.seed, "init");
  NamModel out;
  out.arch = arch;
  out.cfg = cfg;
  out.scaler = Scaler::identity(train.dim());
  out.net = init_nam(train.dim(), arch, rng);
  fit_adam(out.net, train, val, cfg, nam_loss, nam_predict, report);
  return out;
}

GridResult grid_search(const std::vector<NamCandidate>& space, const FeatureMatrix& train, const FeatureMatrix& val) {
  if (space.empty()) throw config_error("grid search space is empty");
  GridResult result;
  bool have_best = false;
  double best_f1 = 0.0;
  for (const auto& cand : space) {
    TrainReport rep;
    NamModel model = train_nam(train, val, cand.cfg, cand.arch, &rep);
    const double f1 = val_f1(nam_predict(model.net, val.rows), val);
    result.report.push_back({cand, f1});

    bool better = !have_best || f1 > best_f1;
    if (have_best && f1 == best_f1) {
      const auto& b = result.best.arch;
      better = cand.arch.hidden < b.hidden ||
               (cand.arch.hidden == b.hidden && cand.arch.activation == Activation::ReLU &&
                b.activation == Activation::ExU);
    }
    if (better) {
      have_best = true;
      best_f1 = f1;
      result.best = cand;
      result.model = std::move(model);
    }
  }
  return result;
}

std::vector<NamCandidate> default_nam_space(const TrainConfig& cfg) {
  std::vector<NamCandidate> space;
  for (int h : {10, 50, 100, 200}) {
    for (auto a : {Activation::ReLU, Activation::ExU}) space.push_back({{h, a}, cfg});
  }
  return space;
}

LrModel train_lr(const FeatureMatrix& train, const FeatureMatrix& val, const TrainConfig& cfg, TrainReport* report) {
  LrModel m;
  m.w = VectorXd::Zero(train.dim());
  m.l2 = cfg.l2;
  m.scaler = Scaler::identity(train.dim());
  auto predict = [](const LrModel& model, const MatrixXd& X) -> VectorXd {
    const VectorXd logits = (X * model.w).array() + model.b;
    return logits.unaryExpr([](double t) { return sigmoid(t); });
  };
  fit_adam(m, train, val, cfg, lr_loss, predict, report);
  return m;
}

DnnModel train_dnn(const FeatureMatrix& train, const FeatureMatrix& val, const TrainConfig& cfg, int hidden,
                   DnnActivation act, TrainReport* report) {
  if (hidden <= 0) throw config_error("hidden width must be positive");
  auto rng = make_rng(cfg.seed, "init");
  const double in_bound = 1.0 / std::sqrt(double(train.dim()));
  const double out_bound = 1.0 / std::sqrt(double(hidden));
  std::uniform_real_distribution<double> in_w(-in_bound, in_bound);
  std::uniform_real_distribution<double> out_w(-out_bound, out_bound);

  DnnModel m;
  m.activation = act;
  m.scaler = Scaler::identity(train.dim());
  m.W1.resize(hidden, train.dim());
  for (Eigen::Index i = 0; i < m.W1.size(); ++i) m.W1.data()[i] = in_w(rng);
  m.b1 = VectorXd::Zero(hidden);
  m.w2.resize(hidden);
  for (Eigen::Index i = 0; i < hidden; ++i) m.w2(i) = out_w(rng);

  auto predict = [](const DnnModel& model, const MatrixXd& X) -> VectorXd {
    VectorXd out(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) out(r) = model.predict(X.row(r).transpose());
    return out;
  };
  fit_adam(m, train, val, cfg, dnn_loss, predict, report);
  return m;
}

}  // namespace mtnam
