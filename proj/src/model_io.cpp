#include "mtnam/model_io.hpp"

#include "mtnam/signal_io.hpp"

#include <fstream>
#include <sstream>

namespace mtnam {

namespace {

void write_vector(std::ostream& os, const char* key, const VectorXd& v) {
  os << key;
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << format_double(v(i));
  os << '\n';
}

void write_preamble(std::ostream& os, const std::string& header_comment, const char* kind) {
  if (!header_comment.empty()) os << "# " << header_comment << '\n';
  os << "mtnam-model " << kModelFormatVersion << '\n' << "kind " << kind << '\n';
}

void write_scaler(std::ostream& os, const Scaler& s) {
  write_vector(os, "scaler_mean", s.mean);
  write_vector(os, "scaler_std", s.stddev);
}

/// Token reader over the non-comment lines of a model file.
class Reader {
 public:
  Reader(const std::filesystem::path& path, const char* kind) : path_(path.string()) {
    std::ifstream in(path);
    if (!in) throw missing_input("cannot open model file " + path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line.front() == '#') continue;
      lines_.push_back(line);
    }
    auto head = expect("mtnam-model");
    int version = 0;
    head >> version;
    if (version != kModelFormatVersion) fail("unsupported format version " + std::to_string(version));
    std::string k;
    expect("kind") >> k;
    if (k != kind) fail(std::string("expected a '") + kind + "' model, found '" + k + "'");
  }

  std::istringstream expect(const std::string& key) {
    if (pos_ >= lines_.size()) fail("unexpected end of file, wanted '" + key + "'");
    std::istringstream is(lines_[pos_++]);
    std::string got;
    is >> got;
    if (got != key) fail("expected '" + key + "', found '" + got + "'");
    return is;
  }

  template <typename T>
  T scalar(const std::string& key) {
    auto is = expect(key);
    std::string tok;
    is >> tok;
    if constexpr (std::is_floating_point_v<T>) {
      return parse_double(tok);
    } else if constexpr (std::is_integral_v<T>) {
      return static_cast<T>(std::stoll(tok));
    } else {
      return tok;
    }
  }

  VectorXd vector(const std::string& key, Eigen::Index n) {
    auto is = expect(key);
    VectorXd v(n);
    std::string tok;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(is >> tok)) fail("'" + key + "' has fewer than " + std::to_string(n) + " values");
      v(i) = parse_double(tok);
    }
    if (is >> tok) fail("'" + key + "' has more than " + std::to_string(n) + " values");
    return v;
  }

  std::string next_line() {
    if (pos_ >= lines_.size()) fail("unexpected end of file");
    return lines_[pos_++];
  }

  [[noreturn]] void fail(const std::string& msg) const { throw data_error("model file " + path_ + ": " + msg); }

 private:
  std::string path_;
  std::vector<std::string> lines_;
  std::size_t pos_{0};
};

Scaler read_scaler(Reader& r, Eigen::Index dim) {
  Scaler s;
  s.mean = r.vector("scaler_mean", dim);
  s.stddev = r.vector("scaler_std", dim);
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw missing_input("cannot write " + path.string());
  out << text;
}

std::string with_header(const std::string& header_comment, const std::string& body) {
  return header_comment.empty() ? body : "# " + header_comment + "\n" + body;
}

}  // namespace

std::string nam_to_string(const NamModel& m) {
  std::ostringstream os;
  write_preamble(os, {}, "nam");
  os << "dim " << m.dim() << '\n'
     << "hidden " << m.arch.hidden << '\n'
     << "activation " << to_string(m.arch.activation) << '\n'
     << "learning_rate " << format_double(m.cfg.learning_rate) << '\n'
     << "epochs " << m.cfg.epochs << '\n'
     << "batch_size " << m.cfg.batch_size << '\n'
     << "seed " << m.cfg.seed << '\n';
  write_scaler(os, m.scaler);
  for (std::size_t j = 0; j < m.net.nets.size(); ++j) {
    const auto& n = m.net.nets[j];
    os << "net " << j << '\n';
    write_vector(os, "w", n.w);
    write_vector(os, "b", n.b);
    write_vector(os, "v", n.v);
    os << "c " << format_double(n.c) << '\n';
  }
  return os.str();
}

void save_nam(const std::filesystem::path& path, const NamModel& m, const std::string& header_comment) {
  write_file(path, with_header(header_comment, nam_to_string(m)));
}

NamModel load_nam(const std::filesystem::path& path) {
  Reader r(path, "nam");
  NamModel m;
  const auto dim = r.scalar<long long>("dim");
  m.arch.hidden = static_cast<int>(r.scalar<long long>("hidden"));
  m.arch.activation = parse_activation(r.scalar<std::string>("activation"));
  m.cfg.learning_rate = r.scalar<double>("learning_rate");
  m.cfg.epochs = static_cast<int>(r.scalar<long long>("epochs"));
  m.cfg.batch_size = static_cast<int>(r.scalar<long long>("batch_size"));
  m.cfg.seed = static_cast<std::uint64_t>(std::stoull(r.scalar<std::string>("seed")));
  if (dim <= 0 || m.arch.hidden <= 0) r.fail("non-positive dimension or width");
  m.scaler = read_scaler(r, dim);
  m.net.nets.resize(static_cast<std::size_t>(dim));
  for (long long j = 0; j < dim; ++j) {
    if (r.scalar<long long>("net") != j) r.fail("feature nets out of order");
    auto& n = m.net.nets[static_cast<std::size_t>(j)];
    n.activation = m.arch.activation;
    n.w = r.vector("w", m.arch.hidden);
    n.b = r.vector("b", m.arch.hidden);
    n.v = r.vector("v", m.arch.hidden);
    n.c = r.scalar<double>("c");
  }
  return m;
}

std::string mtnam_to_string(const MtNamModel& m) {
  std::ostringstream os;
  write_preamble(os, {}, "mtnam");
  os << "dim " << m.dim() << '\n' << "depth " << m.depth << '\n' << "teacher_hash " << hex64(m.teacher_hash) << '\n';
  write_scaler(os, m.scaler);
  for (std::size_t j = 0; j < m.trees.size(); ++j) {
    const auto& t = m.trees[j];
    os << "tree " << j << ' ' << t.nodes.size() << '\n';
    // Nodes are already stored in pre-order.
    for (const auto& n : t.nodes) {
      os << (n.leaf ? "L " : "I ") << format_double(n.leaf ? n.value : n.threshold) << '\n';
    }
  }
  return os.str();
}

void save_mtnam(const std::filesystem::path& path, const MtNamModel& m, const std::string& header_comment) {
  write_file(path, with_header(header_comment, mtnam_to_string(m)));
}

MtNamModel load_mtnam(const std::filesystem::path& path) {
  Reader r(path, "mtnam");
  const auto dim = r.scalar<long long>("dim");
  const int depth = static_cast<int>(r.scalar<long long>("depth"));
  const auto hash = std::stoull(r.scalar<std::string>("teacher_hash"), nullptr, 16);
  if (dim <= 0 || depth < 0) r.fail("bad dimension or depth");
  Scaler scaler = read_scaler(r, dim);

  std::vector<RegressionTree> trees;
  for (long long j = 0; j < dim; ++j) {
    auto head = r.expect("tree");
    long long idx = -1, count = 0;
    head >> idx >> count;
    if (idx != j || count <= 0) r.fail("bad tree header");

    RegressionTree t;
    t.max_depth = depth;
    std::vector<std::pair<char, double>> flat;
    for (long long k = 0; k < count; ++k) {
      std::istringstream is(r.next_line());
      std::string tag, val;
      is >> tag >> val;
      if (tag != "I" && tag != "L") r.fail("tree node must be 'I' or 'L'");
      flat.emplace_back(tag[0], parse_double(val));
    }
    // Rebuild child links from the pre-order listing.
    std::size_t cursor = 0;
    auto build = [&](auto&& self) -> int {
      if (cursor >= flat.size()) r.fail("tree listing ends early");
      const auto [tag, value] = flat[cursor++];
      const int id = static_cast<int>(t.nodes.size());
      t.nodes.emplace_back();
      if (tag == 'L') {
        t.nodes[static_cast<std::size_t>(id)].value = value;
        return id;
      }
      const int left = self(self);
      const int right = self(self);
      auto& n = t.nodes[static_cast<std::size_t>(id)];
      n.leaf = false;
      n.threshold = value;
      n.left = left;
      n.right = right;
      return id;
    };
    build(build);
    if (cursor != flat.size()) r.fail("tree listing has trailing nodes");
    if (t.depth() > depth) r.fail("tree deeper than declared depth");
    trees.push_back(std::move(t));
  }
  return MtNamModel(std::move(trees), depth, hash, std::move(scaler));
}

void save_lr(const std::filesystem::path& path, const LrModel& m, const std::string& header_comment) {
  std::ostringstream os;
  write_preamble(os, header_comment, "lr");
  os << "dim " << m.w.size() << '\n' << "l2 " << format_double(m.l2) << '\n';
  write_scaler(os, m.scaler);
  write_vector(os, "w", m.w);
  os << "b " << format_double(m.b) << '\n';
  write_file(path, os.str());
}

LrModel load_lr(const std::filesystem::path& path) {
  Reader r(path, "lr");
  LrModel m;
  const auto dim = r.scalar<long long>("dim");
  m.l2 = r.scalar<double>("l2");
  m.scaler = read_scaler(r, dim);
  m.w = r.vector("w", dim);
  m.b = r.scalar<double>("b");
  return m;
}

void save_dnn(const std::filesystem::path& path, const DnnModel& m, const std::string& header_comment) {
  std::ostringstream os;
  write_preamble(os, header_comment, "dnn");
  os << "dim " << m.W1.cols() << '\n'
     << "hidden " << m.W1.rows() << '\n'
     << "activation " << (m.activation == DnnActivation::ReLU ? "relu" : "leaky_relu") << '\n';
  write_scaler(os, m.scaler);
  for (Eigen::Index u = 0; u < m.W1.rows(); ++u) write_vector(os, "W1", m.W1.row(u).transpose());
  write_vector(os, "b1", m.b1);
  write_vector(os, "w2", m.w2);
  os << "b2 " << format_double(m.b2) << '\n';
  write_file(path, os.str());
}

DnnModel load_dnn(const std::filesystem::path& path) {
  Reader r(path, "dnn");
  DnnModel m;
  const auto dim = r.scalar<long long>("dim");
  const auto hidden = r.scalar<long long>("hidden");
  const auto act = r.scalar<std::string>("activation");
  if (act == "relu") {
    m.activation = DnnActivation::ReLU;
  } else if (act == "leaky_relu") {
    m.activation = DnnActivation::LeakyReLU;
  } else {
    r.fail("unknown DNN activation '" + act + "'");
  }
  m.scaler = read_scaler(r, dim);
  m.W1.resize(hidden, dim);
  for (long long u = 0; u < hidden; ++u) m.W1.row(u) = r.vector("W1", dim).transpose();
  m.b1 = r.vector("b1", hidden);
  m.w2 = r.vector("w2", hidden);
  m.b2 = r.scalar<double>("b2");
  return m;
}

std::string read_header_value(const std::filesystem::path& path, const std::string& key) {
  std::ifstream in(path);
  std::string line;
  const std::string needle = key + "=";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() != '#') break;
    std::istringstream is(line.substr(1));
    std::string tok;
    while (is >> tok) {
      if (tok.rfind(needle, 0) == 0) return tok.substr(needle.size());
    }
  }
  return {};
}

}  // namespace mtnam
