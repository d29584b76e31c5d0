#include "minlab/cartan.hpp"

#include <cmath>

namespace minlab {

namespace {

// Modified Gram-Schmidt with pivoting in the inner product G; columns with
// remaining norm below 1e-12 of the largest are dropped.
Mat orthonormal_span(const Mat& cols, const Mat& g) {
  Mat work = cols;
  std::vector<Vec> kept;
  double scale = 0.0;
  for (int c = 0; c < work.cols(); ++c)
    scale = std::max(scale, std::sqrt(work.col(c).dot(g * work.col(c))));
  for (int pass = 0; pass < work.cols(); ++pass) {
    int best = -1;
    double best_norm = 0.0;
    for (int c = 0; c < work.cols(); ++c) {
      double nc = std::sqrt(std::max(0.0, work.col(c).dot(g * work.col(c))));
      if (nc > best_norm) {
        best_norm = nc;
        best = c;
      }
    }
    if (best < 0 || best_norm <= 1e-12 * scale) break;
    Vec q = work.col(best) / best_norm;
    kept.push_back(q);
    for (int c = 0; c < work.cols(); ++c) {
      double proj = q.dot(g * work.col(c));
      work.col(c) -= proj * q;
    }
  }
  Mat out(cols.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = kept[i];
  return out;
}

}  // namespace

CartanDecomposition cartan_decompose(const SpaceModel& model, const Vec& p) {
  const LieAlgebraBasis* alg = model.group();
  if (!alg) throw input_error("model carries no isometry algebra");
  int d = alg->dim();
  CartanDecomposition dec;
  dec.base_point = p;
  dec.involution = model.involution_on_algebra(p);
  if ((dec.involution * dec.involution - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-8)
    throw numeric_error("point involution does not square to the identity");
  dec.gram_scaled = model.scaled_gram();
  Mat proj_k = 0.5 * (Mat::Identity(d, d) + dec.involution);
  Mat proj_n = 0.5 * (Mat::Identity(d, d) - dec.involution);
  dec.k_basis = orthonormal_span(proj_k, dec.gram_scaled);
  dec.n_basis = orthonormal_span(proj_n, dec.gram_scaled);
  if (dec.dim_k() + dec.dim_n() != d)
    throw numeric_error("eigenspace dimensions do not fill the algebra");
  return dec;
}

BracketInclusionResiduals bracket_inclusion_residuals(const SpaceModel& model,
                                                      const CartanDecomposition& dec) {
  const LieAlgebraBasis* alg = model.group();
  const Mat& g = dec.gram_scaled;
  Mat pk = dec.k_basis * dec.k_basis.transpose() * g;  // G-orthogonal projector onto k
  Mat pn = dec.n_basis * dec.n_basis.transpose() * g;
  auto off_part = [&](const Vec& x, const Mat& proj_keep) {
    Vec rest = x - proj_keep * x;
    return std::sqrt(std::max(0.0, rest.dot(g * rest)));
  };
  BracketInclusionResiduals r{0, 0, 0, 0};
  for (int a = 0; a < dec.dim_k(); ++a)
    for (int b = 0; b < dec.dim_k(); ++b)
      r.kk_in_k = std::max(r.kk_in_k,
                           off_part(alg->bracket(dec.k_basis.col(a), dec.k_basis.col(b)), pk));
  for (int a = 0; a < dec.dim_k(); ++a)
    for (int b = 0; b < dec.dim_n(); ++b)
      r.kn_in_n = std::max(r.kn_in_n,
                           off_part(alg->bracket(dec.k_basis.col(a), dec.n_basis.col(b)), pn));
  for (int a = 0; a < dec.dim_n(); ++a)
    for (int b = 0; b < dec.dim_n(); ++b)
      r.nn_in_k = std::max(r.nn_in_k,
                           off_part(alg->bracket(dec.n_basis.col(a), dec.n_basis.col(b)), pk));
  r.k_orth_n = (dec.k_basis.transpose() * g * dec.n_basis).cwiseAbs().maxCoeff();
  return r;
}

Vec fd_covariant_derivative(const SpaceModel& model,
                            const std::function<Vec(const Vec&)>& field, const Vec& p,
                            const Vec& v, double h) {
  Vec pp = p + h * v, pm = p - h * v;
  Vec dfield = (field(pp) - field(pm)) / (2.0 * h);
  auto gamma = model.christoffel(p);
  Vec fp = field(p);
  Vec corr = Vec::Zero(model.dim());
  for (int k = 0; k < model.dim(); ++k) corr[k] = v.dot(gamma[k] * fp);
  return dfield + corr;
}

}  // namespace minlab
