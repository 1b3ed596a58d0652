#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tgslope {

inline constexpr const char* kVersion = "0.1.0";

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// Error taxonomy.  InvalidArgument: a caller violated a documented
// precondition or supplied malformed values.  NumericalError: a computation
// could not produce a usable result (divergence, non-convergence).
// IoError: filesystem or file-format trouble.  The CLI maps the three to
// distinct exit codes (2 / 4 / 3).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace detail

}  // namespace tgslope
