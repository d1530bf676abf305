#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fgsim {

using Real = double;
using Complex = std::complex<double>;

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr Real kPi = 3.14159265358979323846;

// Error taxonomy.  The command-line driver maps these to process exit codes:
// bad inputs and semantic violations exit with 2, size/budget refusals with 3.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Number of threads worker loops may use.  Reads FGSIM_THREADS when set
// (values < 1 clamp to 1), otherwise the hardware concurrency.
int max_threads();

}  // namespace fgsim
