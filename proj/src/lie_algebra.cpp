#include "minlab/lie_algebra.hpp"

#include <cmath>

namespace minlab {

LieAlgebraBasis LieAlgebraBasis::so(int m) {
  if (m < 2) throw input_error("so(m) requires m >= 2");
  LieAlgebraBasis alg;
  alg.name_ = "so(" + std::to_string(m) + ")";
  alg.m_ = m;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      CMat b = CMat::Zero(m, m);
      b(i, j) = 1.0;
      b(j, i) = -1.0;
      alg.basis_.push_back(b);
    }
  }
  alg.dim_ = static_cast<int>(alg.basis_.size());
  alg.finalize();
  return alg;
}

LieAlgebraBasis LieAlgebraBasis::su(int m) {
  if (m < 2) throw input_error("su(m) requires m >= 2");
  LieAlgebraBasis alg;
  alg.name_ = "su(" + std::to_string(m) + ")";
  alg.m_ = m;
  const cplx I(0.0, 1.0);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      CMat b = CMat::Zero(m, m);
      b(i, j) = I;
      b(j, i) = I;
      alg.basis_.push_back(b);
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      CMat b = CMat::Zero(m, m);
      b(i, j) = 1.0;
      b(j, i) = -1.0;
      alg.basis_.push_back(b);
    }
  }
  for (int l = 1; l < m; ++l) {
    CMat b = CMat::Zero(m, m);
    double s = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int k = 0; k < l; ++k) b(k, k) = I * s;
    b(l, l) = -I * s * static_cast<double>(l);
    alg.basis_.push_back(b);
  }
  alg.dim_ = static_cast<int>(alg.basis_.size());
  alg.finalize();
  return alg;
}

void LieAlgebraBasis::finalize() {
  frob_ = Mat(dim_, dim_);
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b)
      frob_(a, b) = (basis_[a].adjoint() * basis_[b]).trace().real();
  frob_llt_.compute(frob_);
  if (frob_llt_.info() != Eigen::Success)
    throw numeric_error("basis Frobenius Gram is not positive definite");

  c_.assign(dim_, Mat::Zero(dim_, dim_));
  for (int a = 0; a < dim_; ++a) {
    for (int b = 0; b < dim_; ++b) {
      CMat br = basis_[a] * basis_[b] - basis_[b] * basis_[a];
      Vec rhs(dim_);
      for (int k = 0; k < dim_; ++k) rhs[k] = (basis_[k].adjoint() * br).trace().real();
      Vec coeff = frob_llt_.solve(rhs);
      CMat rec = CMat::Zero(m_, m_);
      for (int k = 0; k < dim_; ++k) rec += coeff[k] * basis_[k];
      double ref = std::max(1.0, br.norm());
      if ((rec - br).norm() > 1e-12 * ref)
        throw numeric_error("bracket does not close over the basis");
      for (int k = 0; k < dim_; ++k) c_[a](b, k) = coeff[k];
    }
  }

  ad_.assign(dim_, Mat::Zero(dim_, dim_));
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b)
      for (int k = 0; k < dim_; ++k) ad_[a](k, b) = c_[a](b, k);

  killing_ = Mat(dim_, dim_);
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) killing_(a, b) = (ad_[a] * ad_[b]).trace();
  gram_ = -killing_;
}

CMat LieAlgebraBasis::matrix_of(const Vec& coeff) const {
  if (coeff.size() != dim_) throw input_error("coefficient vector has wrong dimension");
  CMat x = CMat::Zero(m_, m_);
  for (int a = 0; a < dim_; ++a) x += coeff[a] * basis_[a];
  return x;
}

Vec LieAlgebraBasis::expand(const CMat& x) const {
  if (x.rows() != m_ || x.cols() != m_) throw input_error("matrix has wrong size for algebra");
  Vec rhs(dim_);
  for (int k = 0; k < dim_; ++k) rhs[k] = (basis_[k].adjoint() * x).trace().real();
  Vec coeff = frob_llt_.solve(rhs);
  CMat rec = CMat::Zero(m_, m_);
  for (int k = 0; k < dim_; ++k) rec += coeff[k] * basis_[k];
  double ref = std::max(1.0, x.norm());
  if ((rec - x).norm() > 1e-12 * ref)
    throw numeric_error("matrix does not lie in the algebra (expansion residual > 1e-12)");
  return coeff;
}

Vec LieAlgebraBasis::bracket(const Vec& x, const Vec& y) const {
  CMat a = matrix_of(x), b = matrix_of(y);
  return expand(a * b - b * a);
}

Vec LieAlgebraBasis::bracket_structure(const Vec& x, const Vec& y) const {
  Vec out = Vec::Zero(dim_);
  for (int a = 0; a < dim_; ++a)
    if (x[a] != 0.0) out += x[a] * (ad_[a] * y);
  return out;
}

double LieAlgebraBasis::jacobi_residual() const {
  double worst = 0.0;
  for (int a = 0; a < dim_; ++a) {
    for (int b = 0; b < dim_; ++b) {
      for (int k = 0; k < dim_; ++k) {
        Vec ea = Vec::Unit(dim_, a), eb = Vec::Unit(dim_, b), ek = Vec::Unit(dim_, k);
        Vec r = bracket_structure(ea, bracket_structure(eb, ek)) +
                bracket_structure(eb, bracket_structure(ek, ea)) +
                bracket_structure(ek, bracket_structure(ea, eb));
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

double LieAlgebraBasis::ad_invariance_residual() const {
  double worst = 0.0;
  for (int z = 0; z < dim_; ++z) {
    Mat lhs = ad_[z].transpose() * killing_ + killing_ * ad_[z];
    worst = std::max(worst, lhs.cwiseAbs().maxCoeff());
  }
  return worst;
}

JsonValue LieAlgebraBasis::to_json() const {
  JsonValue j = JsonValue::object();
  j.set("name", name_);
  j.set("dim", dim_);
  j.set("matrix_size", m_);
  JsonValue basis = JsonValue::array();
  for (const auto& b : basis_) {
    JsonValue entry = JsonValue::object();
    entry.set("re", JsonValue::from_matrix(b.real()));
    entry.set("im", JsonValue::from_matrix(b.imag()));
    basis.push(std::move(entry));
  }
  j.set("basis", std::move(basis));
  JsonValue cs = JsonValue::array();
  for (const auto& ca : c_) cs.push(JsonValue::from_matrix(ca));
  j.set("structure_constants", std::move(cs));
  j.set("killing", JsonValue::from_matrix(killing_));
  j.set("gram", JsonValue::from_matrix(gram_));
  return j;
}

double killing_closed_form(const LieAlgebraBasis& alg, const Vec& x, const Vec& y) {
  CMat a = alg.matrix_of(x), b = alg.matrix_of(y);
  double txy = (a * b).trace().real();
  int m = alg.matrix_size();
  if (alg.name().rfind("so", 0) == 0) return (m - 2) * txy;
  if (alg.name().rfind("su", 0) == 0) return 2.0 * m * txy;
  throw input_error("no closed-form Killing expression for " + alg.name());
}

}  // namespace minlab
