#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mtnam {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using VectorXd = Vector<double>;
using MatrixXd = Eigen::MatrixXd;

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { Data, Config, MissingInput, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error data_error(const std::string& msg) { return Error(ErrorKind::Data, msg); }
inline Error config_error(const std::string& msg) { return Error(ErrorKind::Config, msg); }
inline Error missing_input(const std::string& msg) { return Error(ErrorKind::MissingInput, msg); }
inline Error numeric_error(const std::string& msg) { return Error(ErrorKind::Numeric, msg); }

/// Logistic function with the argument clamped to [-500, 500]. The result
/// is kept strictly below 1 so downstream log terms stay finite.
template <typename Scalar>
inline Scalar sigmoid(Scalar t) {
  using std::exp;
  if (t > Scalar(500)) t = Scalar(500);
  if (t < Scalar(-500)) t = Scalar(-500);
  const Scalar y = Scalar(1) / (Scalar(1) + exp(-t));
  const Scalar below_one = std::nextafter(Scalar(1), Scalar(0));
  return y < below_one ? y : below_one;
}

/// 64-bit FNV-1a, used for config hashes and model fingerprints.
inline std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v);

}  // namespace mtnam
