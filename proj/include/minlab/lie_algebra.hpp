#pragma once

#include <string>
#include <vector>

#include "minlab/common.hpp"
#include "minlab/json_value.hpp"

namespace minlab {

// Matrix Lie algebra with a fixed basis. Basis matrices are stored complex;
// coefficient vectors, structure constants and the Gram matrix are real.
class LieAlgebraBasis {
 public:
  static LieAlgebraBasis so(int m);  // L_ij = E_ij - E_ji, i<j lexicographic
  static LieAlgebraBasis su(int m);  // i * generalized Gell-Mann, pairs then diagonals

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  int matrix_size() const { return m_; }
  const CMat& basis(int a) const { return basis_[a]; }

  // c[a](b,k): [theta_a, theta_b] = sum_k c[a](b,k) theta_k.
  double structure_constant(int a, int b, int k) const { return c_[a](b, k); }
  const Mat& ad(int a) const { return ad_[a]; }

  // Killing form B(theta_a, theta_b) = tr(ad_a ad_b) and its negative.
  const Mat& killing_matrix() const { return killing_; }
  const Mat& gram() const { return gram_; }

  double killing_form(const Vec& x, const Vec& y) const { return x.dot(killing_ * y); }

  CMat matrix_of(const Vec& coeff) const;
  // Expand a matrix over the basis; throws numeric_error if the residual
  // exceeds 1e-12 relative to the input norm.
  Vec expand(const CMat& x) const;
  Vec bracket(const Vec& x, const Vec& y) const;            // via matrices + expand
  Vec bracket_structure(const Vec& x, const Vec& y) const;  // via structure constants

  double jacobi_residual() const;        // max over basis triples
  double ad_invariance_residual() const; // max |B([z,x],y)+B(x,[z,y])|

  JsonValue to_json() const;

 private:
  void finalize();  // structure constants, Killing form, expansion factor

  std::string name_;
  int m_ = 0;
  int dim_ = 0;
  std::vector<CMat> basis_;
  std::vector<Mat> c_;
  std::vector<Mat> ad_;
  Mat killing_;
  Mat gram_;
  Mat frob_;  // Re tr(theta_a^* theta_b), used for expansion
  Eigen::LLT<Mat> frob_llt_;
};

// Closed-form Killing values used as oracles: (m-2) tr(XY) on so(m),
// 2m tr(XY) on su(m).
double killing_closed_form(const LieAlgebraBasis& alg, const Vec& x, const Vec& y);

}  // namespace minlab
