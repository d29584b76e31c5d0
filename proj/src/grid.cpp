#include "minlab/grid.hpp"

#include <cmath>
#include <vector>

namespace minlab {

PeriodicGrid::PeriodicGrid(int dim, int n1, int n2) : dim_(dim), n1_(n1), n2_(dim == 1 ? 1 : n2) {
  if (dim != 1 && dim != 2) throw input_error("grid dimension must be 1 or 2");
  if (n1_ < 8 || (dim_ == 2 && n2_ < 8)) throw input_error("grid resolution must be >= 8 per axis");
}

namespace {

// Offsets and weights for the one-sided half of a central stencil; the
// weight at offset -k is sign * weight at +k.
struct Stencil {
  std::vector<int> off;
  std::vector<double> w;
};

Stencil central_stencil(int deriv, int order, double h) {
  Stencil s;
  if (deriv == 1) {
    if (order == 2) {
      s.off = {-1, 1};
      s.w = {-1.0 / (2 * h), 1.0 / (2 * h)};
    } else if (order == 4) {
      s.off = {-2, -1, 1, 2};
      s.w = {1.0 / (12 * h), -8.0 / (12 * h), 8.0 / (12 * h), -1.0 / (12 * h)};
    } else if (order == 6) {
      s.off = {-3, -2, -1, 1, 2, 3};
      s.w = {-1.0 / (60 * h), 9.0 / (60 * h),  -45.0 / (60 * h),
             45.0 / (60 * h), -9.0 / (60 * h), 1.0 / (60 * h)};
    } else {
      throw input_error("difference order must be 2, 4 or 6");
    }
  } else if (deriv == 2) {
    double h2 = h * h;
    if (order == 2) {
      s.off = {-1, 0, 1};
      s.w = {1.0 / h2, -2.0 / h2, 1.0 / h2};
    } else if (order == 4) {
      s.off = {-2, -1, 0, 1, 2};
      s.w = {-1.0 / (12 * h2), 16.0 / (12 * h2), -30.0 / (12 * h2), 16.0 / (12 * h2),
             -1.0 / (12 * h2)};
    } else if (order == 6) {
      s.off = {-3, -2, -1, 0, 1, 2, 3};
      s.w = {2.0 / (180 * h2),   -27.0 / (180 * h2), 270.0 / (180 * h2), -490.0 / (180 * h2),
             270.0 / (180 * h2), -27.0 / (180 * h2), 2.0 / (180 * h2)};
    } else {
      throw input_error("difference order must be 2, 4 or 6");
    }
  } else {
    throw input_error("derivative must be 1 or 2");
  }
  return s;
}

}  // namespace

Vec apply_diff(const PeriodicGrid& g, int axis, int deriv, int order, const Vec& f) {
  if (f.size() != static_cast<Eigen::Index>(g.size())) throw input_error("grid function size mismatch");
  Stencil s = central_stencil(deriv, order, g.h(axis));
  Vec out = Vec::Zero(f.size());
  int n1 = g.n(0), n2 = g.n(1);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < s.off.size(); ++k) {
        int ii = i, jj = j;
        if (axis == 0)
          ii += s.off[k];
        else
          jj += s.off[k];
        acc += s.w[k] * f[g.index(ii, jj)];
      }
      out[g.index(i, j)] = acc;
    }
  }
  return out;
}

SpMat diff_matrix(const PeriodicGrid& g, int axis, int deriv, int order) {
  Stencil s = central_stencil(deriv, order, g.h(axis));
  std::vector<Triplet> trips;
  trips.reserve(g.size() * s.off.size());
  int n1 = g.n(0), n2 = g.n(1);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      auto row = g.index(i, j);
      for (std::size_t k = 0; k < s.off.size(); ++k) {
        int ii = i, jj = j;
        if (axis == 0)
          ii += s.off[k];
        else
          jj += s.off[k];
        trips.emplace_back(static_cast<int>(row), static_cast<int>(g.index(ii, jj)), s.w[k]);
      }
    }
  }
  SpMat m(static_cast<int>(g.size()), static_cast<int>(g.size()));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

double integrate(const PeriodicGrid& g, const Vec& f) {
  if (f.size() != static_cast<Eigen::Index>(g.size())) throw input_error("grid function size mismatch");
  double cell = g.h(0) * (g.dim() == 2 ? g.h(1) : 1.0);
  return cell * f.sum();
}

Mat collocation_diff_matrix(int n) {
  if (n % 2 == 0) throw input_error("collocation derivative requires odd n");
  double h = kTwoPi / n;
  Mat d = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      int diff = j - k;
      double sign = (diff % 2 == 0) ? 1.0 : -1.0;
      d(j, k) = sign / (2.0 * std::sin(0.5 * diff * h));
    }
  }
  return d;
}

}  // namespace minlab
