#include "mtnam/features.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <fstream>

namespace mtnam {

FeatureMatrix FeatureMatrix::slice(Eigen::Index begin, Eigen::Index end) const {
  FeatureMatrix out;
  out.window_s = window_s;
  out.rows = rows.middleRows(begin, end - begin);
  out.labels.assign(labels.begin() + begin, labels.begin() + end);
  out.window_start_s.assign(window_start_s.begin() + begin, window_start_s.begin() + end);
  return out;
}

FeatureMatrix FeatureMatrix::select(const std::vector<Eigen::Index>& idx) const {
  FeatureMatrix out;
  out.window_s = window_s;
  out.rows.resize(static_cast<Eigen::Index>(idx.size()), rows.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.rows.row(static_cast<Eigen::Index>(k)) = rows.row(idx[k]);
    out.labels.push_back(labels[static_cast<std::size_t>(idx[k])]);
    out.window_start_s.push_back(window_start_s[static_cast<std::size_t>(idx[k])]);
  }
  return out;
}

Eigen::Index FeatureMatrix::count_ictal() const {
  Eigen::Index n = 0;
  for (int l : labels) n += (l == 1);
  return n;
}

std::vector<WindowBound> window_bounds(const Recording& rec, double win_s) {
  const double exact = win_s * rec.fs;
  const auto win = static_cast<std::size_t>(std::llround(exact));
  if (win == 0 || std::abs(exact - double(win)) > 1e-9) {
    throw config_error("window length times sampling rate must be a positive integer");
  }
  const std::size_t n_windows = rec.n_samples() / win;
  if (n_windows == 0) throw data_error("recording is shorter than one window");

  std::vector<WindowBound> out;
  out.reserve(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    const double t0 = double(w * win) / rec.fs;
    const double t1 = double((w + 1) * win) / rec.fs;
    int label = 0;
    for (const auto& s : rec.seizures) {
      if (t0 < s.end_s && s.start_s < t1) {
        label = 1;
        break;
      }
    }
    out.push_back({w * win, (w + 1) * win, label});
  }
  return out;
}

double line_length(std::span<const double> x) {
  if (x.size() < 2) throw data_error("line length needs at least 2 samples");
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) acc += std::abs(x[i] - x[i - 1]);
  return acc;
}

double variance(std::span<const double> x) {
  if (x.empty()) throw data_error("variance needs at least 1 sample");
  const Eigen::Map<const Eigen::ArrayXd> a(x.data(), static_cast<Eigen::Index>(x.size()));
  return (a - a.mean()).square().mean();
}

std::vector<double> periodogram(std::span<const double> x) {
  if (x.empty()) throw data_error("periodogram of an empty window");
  std::size_t n_fft = 1;
  while (n_fft < x.size()) n_fft <<= 1;
  std::vector<double> padded(x.begin(), x.end());
  padded.resize(n_fft, 0.0);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);

  const double norm = double(x.size()) * double(n_fft);
  std::vector<double> p(n_fft);
  for (std::size_t k = 0; k < n_fft; ++k) p[k] = std::norm(spectrum[k]) / norm;
  return p;
}

BandPowers band_powers(std::span<const double> x, int fs) {
  if (fs <= 0) throw config_error("sampling rate must be positive");
  const auto p = periodogram(x);
  const std::size_t n_fft = p.size();
  const double nyquist = fs / 2.0;

  BandPowers out;
  for (std::size_t b = 0; b < kBands.size(); ++b) out.unresolved[b] = kBands[b].low_hz >= nyquist;

  // One-sided bins k = 1 .. n_fft/2; interior bins carry both halves.
  for (std::size_t k = 1; k <= n_fft / 2; ++k) {
    const double f = double(k) * fs / double(n_fft);
    const double power = (2 * k == n_fft) ? p[k] : 2.0 * p[k];
    for (std::size_t b = 0; b < kBands.size(); ++b) {
      if (!out.unresolved[b] && kBands[b].low_hz <= f && f < kBands[b].high_hz) {
        out.power[b] += power;
        break;
      }
    }
  }
  return out;
}

FeatureMatrix extract_features(const Recording& rec, double win_s) {
  rec.validate();
  const auto bounds = window_bounds(rec, win_s);
  const auto n_ch = static_cast<int>(rec.n_channels());

  FeatureMatrix fm;
  fm.window_s = win_s;
  fm.rows.resize(static_cast<Eigen::Index>(bounds.size()), n_ch * kFeaturesPerChannel);
  for (std::size_t w = 0; w < bounds.size(); ++w) {
    const auto& wb = bounds[w];
    fm.labels.push_back(wb.label);
    fm.window_start_s.push_back(double(wb.start_sample) / rec.fs);
    for (int c = 0; c < n_ch; ++c) {
      const std::span<const double> x(rec.samples[static_cast<std::size_t>(c)].data() + wb.start_sample,
                                      wb.end_sample - wb.start_sample);
      const auto bp = band_powers(x, rec.fs);
      const auto r = static_cast<Eigen::Index>(w);
      for (int b = 0; b < kNumBands; ++b) fm.rows(r, feature_index(c, b)) = bp.power[static_cast<std::size_t>(b)];
      fm.rows(r, feature_index(c, kNumBands)) = x.size() >= 2 ? line_length(x) : 0.0;
      fm.rows(r, feature_index(c, kNumBands + 1)) = variance(x);
    }
  }
  if (!fm.rows.allFinite()) throw numeric_error("non-finite feature value");
  return fm;
}

Scaler Scaler::fit(const FeatureMatrix& train) {
  if (train.n_windows() == 0) throw data_error("cannot fit scaler on an empty feature matrix");
  Scaler s;
  s.mean = train.rows.colwise().mean().transpose();
  s.stddev = ((train.rows.rowwise() - s.mean.transpose()).array().square().colwise().mean()).sqrt().transpose();
  for (Eigen::Index j = 0; j < s.mean.size(); ++j) {
    const auto col = train.rows.col(j);
    if (col.minCoeff() == col.maxCoeff()) {
      s.mean(j) = col(0);
      s.stddev(j) = kStdFloor;
    } else if (s.stddev(j) < kStdFloor) {
      s.stddev(j) = kStdFloor;
    }
  }
  return s;
}

Scaler Scaler::identity(Eigen::Index dim) {
  return {VectorXd::Zero(dim), VectorXd::Ones(dim)};
}

FeatureMatrix Scaler::apply(const FeatureMatrix& fm) const {
  if (fm.dim() != mean.size()) throw data_error("scaler dimension mismatch");
  FeatureMatrix out = fm;
  out.rows = ((fm.rows.rowwise() - mean.transpose()).array().rowwise() / stddev.transpose().array()).matrix();
  return out;
}

VectorXd Scaler::apply(const VectorXd& x) const {
  if (x.size() != mean.size()) throw data_error("scaler dimension mismatch");
  return ((x - mean).array() / stddev.array()).matrix();
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& fm, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw missing_input("cannot write " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "window_start_s,label";
  for (Eigen::Index j = 0; j < fm.dim(); ++j) out << ",f_" << j;
  out << '\n';
  for (Eigen::Index r = 0; r < fm.n_windows(); ++r) {
    out << format_double(fm.window_start_s[static_cast<std::size_t>(r)]) << ',' << fm.labels[static_cast<std::size_t>(r)];
    for (Eigen::Index j = 0; j < fm.dim(); ++j) out << ',' << format_double(fm.rows(r, j));
    out << '\n';
  }
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path, double window_s) {
  std::ifstream in(path);
  if (!in) throw missing_input("cannot open feature CSV " + path.string());
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<double>> values;
  FeatureMatrix fm;
  fm.window_s = window_s;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    auto cells = split_csv_line(line);
    if (header.empty()) {
      if (cells.size() < 2 || cells[0] != "window_start_s" || cells[1] != "label") {
        throw data_error("feature CSV header must start with window_start_s,label");
      }
      header = std::move(cells);
      continue;
    }
    if (cells.size() != header.size()) throw data_error("ragged row in feature CSV");
    fm.window_start_s.push_back(parse_double(cells[0]));
    const double label = parse_double(cells[1]);
    if (label != 0.0 && label != 1.0) throw data_error("feature CSV label must be 0 or 1");
    fm.labels.push_back(static_cast<int>(label));
    std::vector<double> row;
    for (std::size_t j = 2; j < cells.size(); ++j) row.push_back(parse_double(cells[j]));
    values.push_back(std::move(row));
  }
  if (header.empty()) throw data_error("feature CSV has no header");
  const auto dim = static_cast<Eigen::Index>(header.size() - 2);
  fm.rows.resize(static_cast<Eigen::Index>(values.size()), dim);
  for (std::size_t r = 0; r < values.size(); ++r) {
    for (Eigen::Index j = 0; j < dim; ++j) fm.rows(static_cast<Eigen::Index>(r), j) = values[r][static_cast<std::size_t>(j)];
  }
  return fm;
}

}  // namespace mtnam
