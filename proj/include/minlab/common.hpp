#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <stdexcept>
#include <string>

namespace minlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Bad user-supplied data (CLI arguments, config files, malformed input files).
struct input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Geometric preconditions violated (degenerate metric, non-immersion, ...).
struct geometry_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical process failed (no convergence, residual above contract, ...).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense symmetric rank-4 container, n^4 entries, used for curvature dumps.
class Rank4 {
 public:
  Rank4() = default;
  explicit Rank4(int n) : n_(n), a_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}
  double& operator()(int i, int j, int k, int l) {
    return a_[((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l];
  }
  double operator()(int i, int j, int k, int l) const {
    return a_[((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l];
  }
  int n() const { return n_; }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

}  // namespace minlab
