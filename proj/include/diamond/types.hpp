#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace diamond {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A nonlinear solve failed inside one diamond; carries the mesh location.
class DiamondSolveError : public std::runtime_error {
 public:
  DiamondSolveError(const std::string& what, long level, int d)
      : std::runtime_error(what + " (level " + std::to_string(level) +
                           ", diamond " + std::to_string(d) + ")"),
        level(level),
        diamond(d) {}
  long level;
  int diamond;
};

}  // namespace diamond
