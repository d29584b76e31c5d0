#pragma once

#include <array>
#include <cstddef>

#include "minlab/common.hpp"

namespace minlab {

// Uniform periodic grid on [0,2pi)^dim, dim 1 or 2, row-major (i*n2+j).
class PeriodicGrid {
 public:
  PeriodicGrid(int dim, int n1, int n2 = 1);

  int dim() const { return dim_; }
  int n(int axis) const { return axis == 0 ? n1_ : n2_; }
  double h(int axis) const { return kTwoPi / n(axis); }
  std::size_t size() const { return static_cast<std::size_t>(n1_) * n2_; }
  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(wrap(i, n1_)) * n2_ + wrap(j, n2_);
  }
  int i_of(std::size_t idx) const { return static_cast<int>(idx / n2_); }
  int j_of(std::size_t idx) const { return static_cast<int>(idx % n2_); }
  double u1(std::size_t idx) const { return h(0) * i_of(idx); }
  double u2(std::size_t idx) const { return h(1) * j_of(idx); }

  static int wrap(int i, int n) {
    int r = i % n;
    return r < 0 ? r + n : r;
  }

 private:
  int dim_;
  int n1_;
  int n2_;
};

// Central periodic difference, orders 2/4/6, derivative 1 or 2.
Vec apply_diff(const PeriodicGrid& g, int axis, int deriv, int order, const Vec& f);

// Same stencil as a sparse matrix acting on grid functions.
SpMat diff_matrix(const PeriodicGrid& g, int axis, int deriv, int order);

// Trapezoid rule; exact for trigonometric polynomials below the grid Nyquist.
double integrate(const PeriodicGrid& g, const Vec& f);

// Full antisymmetric circulant first-derivative matrix, exact below Nyquist.
// Requires odd n on the axis.
Mat collocation_diff_matrix(int n);

}  // namespace minlab
