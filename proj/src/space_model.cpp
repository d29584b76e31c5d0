#include "minlab/space_model.hpp"

#include <cmath>

namespace minlab {

Mat SpaceModel::ricci(const Vec& p) const {
  int n = dim();
  Mat g = metric(p);
  Eigen::LLT<Mat> llt(g);
  Mat linv_t = llt.matrixL().toDenseMatrix().transpose().inverse();  // columns: ON frame
  Mat out = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double acc = 0.0;
      for (int a = 0; a < n; ++a) {
        Vec ea = linv_t.col(a);
        Vec r = curvature(p, Vec::Unit(n, i), ea, ea);
        acc += r.dot(g * Vec::Unit(n, j));
      }
      out(i, j) = acc;
      out(j, i) = acc;
    }
  }
  return out;
}

double SpaceModel::scalar_curvature(const Vec& p) const {
  Mat g = metric(p);
  return (g.inverse() * ricci(p)).trace();
}

void SpaceModel::check_chart(const Vec& p) const {
  Mat g = metric(p);
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (lo < 1e-6 || hi > 1e6) {
    std::string msg = "chart metric degenerate at (";
    for (Eigen::Index i = 0; i < p.size(); ++i)
      msg += (i ? "," : "") + std::to_string(p[i]);
    msg += ")";
    throw std::domain_error(msg);
  }
}

Mat SpaceModel::scaled_gram() const {
  const LieAlgebraBasis* alg = group();
  if (!alg) throw input_error("model carries no isometry algebra");
  return gram_scale() * alg->gram();
}

Mat SpaceModel::involution_on_algebra(const Vec&) const {
  throw input_error("model carries no isometry algebra");
}

Vec SpaceModel::fundamental_field(const AlgebraElement&, const Vec&) const {
  throw input_error("model carries no isometry algebra");
}

Vec SpaceModel::fundamental_field_derivative(const AlgebraElement&, const Vec&,
                                             const Vec&) const {
  throw input_error("model carries no isometry algebra");
}

Vec SpaceModel::embed(const Vec&) const {
  throw input_error("model carries no flat embedding");
}

Mat SpaceModel::embed_differential(const Vec&) const {
  throw input_error("model carries no flat embedding");
}

Rank4 SpaceModel::riemann(const Vec& p) const {
  int n = dim();
  Mat g = metric(p);
  Rank4 r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Vec rv = curvature(p, Vec::Unit(n, i), Vec::Unit(n, j), Vec::Unit(n, k));
        Vec low = g * rv;
        for (int l = 0; l < n; ++l) r(i, j, k, l) = low[l];
      }
  return r;
}

double SpaceModel::sectional(const Vec& p, const Vec& x, const Vec& y) const {
  Mat g = metric(p);
  double xx = x.dot(g * x), yy = y.dot(g * y), xy = x.dot(g * y);
  double denom = xx * yy - xy * xy;
  if (denom < 1e-14) throw geometry_error("sectional plane is degenerate");
  Vec r = curvature(p, x, y, y);
  return r.dot(g * x) / denom;
}

// ---------------------------------------------------------------- sphere

SphereModel::SphereModel(int n) : n_(n), alg_(LieAlgebraBasis::so(n + 1)) {
  if (n < 2) throw input_error("sphere dimension must be >= 2");
}

Mat SphereModel::metric(const Vec& p) const {
  double t = 1.0 + p.squaredNorm();
  double f = 4.0 / (t * t);
  if (f < 1e-6 || f > 1e6) {
    std::string msg = "stereographic chart degenerate at |x|^2 = " + std::to_string(p.squaredNorm());
    throw std::domain_error(msg);
  }
  return f * Mat::Identity(n_, n_);
}

std::vector<Mat> SphereModel::christoffel(const Vec& p) const {
  // conformal metric e^{2 rho} I with rho = log(2/(1+|x|^2))
  double t = 1.0 + p.squaredNorm();
  Vec drho = -2.0 * p / t;
  std::vector<Mat> gamma(n_, Mat::Zero(n_, n_));
  for (int k = 0; k < n_; ++k)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        double v = 0.0;
        if (k == i) v += drho[j];
        if (k == j) v += drho[i];
        if (i == j) v -= drho[k];
        gamma[k](i, j) = v;
      }
  return gamma;
}

Vec SphereModel::curvature(const Vec& p, const Vec& x, const Vec& y, const Vec& z) const {
  Mat g = metric(p);
  return y.dot(g * z) * x - x.dot(g * z) * y;
}

Mat SphereModel::ricci(const Vec& p) const { return (n_ - 1.0) * metric(p); }

Vec SphereModel::embed(const Vec& p) const {
  double t = 1.0 + p.squaredNorm();
  Vec q(n_ + 1);
  q.head(n_) = 2.0 * p / t;
  q[n_] = (1.0 - p.squaredNorm()) / t;
  return q;
}

Mat SphereModel::embed_differential(const Vec& p) const {
  double t = 1.0 + p.squaredNorm();
  Mat d(n_ + 1, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      d(i, j) = 2.0 * ((i == j ? 1.0 : 0.0) / t - 2.0 * p[i] * p[j] / (t * t));
  for (int j = 0; j < n_; ++j) d(n_, j) = -4.0 * p[j] / (t * t);
  return d;
}

Mat SphereModel::chart_differential(const Vec& q) const {
  double w = 1.0 + q[n_];
  if (std::abs(w) < 1e-12) throw std::domain_error("chart projection point reached");
  Mat d(n_, n_ + 1);
  d.setZero();
  for (int i = 0; i < n_; ++i) {
    d(i, i) = 1.0 / w;
    d(i, n_) = -q[i] / (w * w);
  }
  return d;
}

Mat SphereModel::involution_on_algebra(const Vec& p) const {
  Vec q = embed(p);
  Mat s = 2.0 * q * q.transpose() - Mat::Identity(n_ + 1, n_ + 1);
  Mat out(alg_.dim(), alg_.dim());
  for (int a = 0; a < alg_.dim(); ++a) {
    Mat xa = alg_.basis(a).real();
    out.col(a) = alg_.expand((s * xa * s).cast<cplx>());
  }
  return out;
}

Vec SphereModel::fundamental_field_ambient(const AlgebraElement& x, const Vec& q) const {
  return alg_.matrix_of(x.coeff).real() * q;
}

Vec SphereModel::fundamental_field(const AlgebraElement& x, const Vec& p) const {
  Vec q = embed(p);
  return chart_differential(q) * fundamental_field_ambient(x, q);
}

Vec SphereModel::fundamental_field_derivative(const AlgebraElement& x, const Vec& p,
                                              const Vec& v) const {
  Vec q = embed(p);
  Vec va = embed_differential(p) * v;
  Mat xm = alg_.matrix_of(x.coeff).real();
  Vec w = xm * va;
  w -= w.dot(q) * q;
  return chart_differential(q) * w;
}

// ---------------------------------------------------------- Fubini-Study

FubiniStudyModel::FubiniStudyModel(int m) : m_(m), alg_(LieAlgebraBasis::su(m + 1)) {
  if (m < 1) throw input_error("projective dimension must be >= 1");
}

CVec FubiniStudyModel::to_complex(const Vec& p) {
  CVec z(p.size() / 2);
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = cplx(p[2 * k], p[2 * k + 1]);
  return z;
}

Vec FubiniStudyModel::to_real(const CVec& z) {
  Vec p(2 * z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    p[2 * k] = z[k].real();
    p[2 * k + 1] = z[k].imag();
  }
  return p;
}

Mat FubiniStudyModel::metric(const Vec& p) const {
  CVec z = to_complex(p);
  double t = 1.0 + z.squaredNorm();
  if (1.0 / (t * t) < 1e-6)
    throw std::domain_error("affine chart degenerate at |z|^2 = " + std::to_string(t - 1.0));
  Mat g(2 * m_, 2 * m_);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) {
      cplx h = (i == j ? 1.0 / t : 0.0) - std::conj(z[i]) * z[j] / (t * t);
      g(2 * i, 2 * j) = h.real();
      g(2 * i, 2 * j + 1) = h.imag();
      g(2 * i + 1, 2 * j) = -h.imag();
      g(2 * i + 1, 2 * j + 1) = h.real();
    }
  return g;
}

CVec FubiniStudyModel::holomorphic_gamma(const CVec& z, const CVec& u, const CVec& v) const {
  double t = 1.0 + z.squaredNorm();
  cplx zbar_u = 0.0, zbar_v = 0.0;
  for (int k = 0; k < m_; ++k) {
    zbar_u += std::conj(z[k]) * u[k];
    zbar_v += std::conj(z[k]) * v[k];
  }
  return (-(zbar_v / t)) * u + (-(zbar_u / t)) * v;
}

std::vector<Mat> FubiniStudyModel::christoffel(const Vec& p) const {
  CVec z = to_complex(p);
  int n = 2 * m_;
  std::vector<Mat> gamma(n, Mat::Zero(n, n));
  for (int a = 0; a < n; ++a) {
    CVec ua = to_complex(Vec::Unit(n, a));
    for (int b = 0; b < n; ++b) {
      CVec ub = to_complex(Vec::Unit(n, b));
      Vec w = to_real(holomorphic_gamma(z, ua, ub));
      for (int k = 0; k < n; ++k) gamma[k](a, b) = w[k];
    }
  }
  return gamma;
}

Mat FubiniStudyModel::complex_structure() const {
  Mat j = Mat::Zero(2 * m_, 2 * m_);
  for (int k = 0; k < m_; ++k) {
    j(2 * k, 2 * k + 1) = -1.0;
    j(2 * k + 1, 2 * k) = 1.0;
  }
  return j;
}

Vec FubiniStudyModel::curvature(const Vec& p, const Vec& x, const Vec& y, const Vec& z) const {
  Mat g = metric(p);
  Mat J = complex_structure();
  Vec jx = J * x, jy = J * y, jz = J * z;
  double yz = y.dot(g * z), xz = x.dot(g * z);
  double jyz = jy.dot(g * z), jxz = jx.dot(g * z), xjy = x.dot(g * jy);
  return yz * x - xz * y + jyz * jx - jxz * jy + 2.0 * xjy * jz;
}

Mat FubiniStudyModel::ricci(const Vec& p) const { return 2.0 * (m_ + 1.0) * metric(p); }

Mat FubiniStudyModel::involution_on_algebra(const Vec& p) const {
  CVec z = to_complex(p);
  int mm = m_ + 1;
  CVec zeta(mm);
  zeta[0] = 1.0;
  zeta.tail(m_) = z;
  CVec u = zeta / zeta.norm();
  CMat hh = CMat::Identity(mm, mm);
  CVec v = CVec::Unit(mm, 0) - u;
  double vn2 = v.squaredNorm();
  if (vn2 > 1e-28) hh -= (2.0 / vn2) * (v * v.adjoint());
  CMat d = -CMat::Identity(mm, mm);
  d(0, 0) = 1.0;
  CMat s = hh * d * hh.adjoint();
  Mat out(alg_.dim(), alg_.dim());
  for (int a = 0; a < alg_.dim(); ++a)
    out.col(a) = alg_.expand(s * alg_.basis(a) * s.adjoint());
  return out;
}

Vec FubiniStudyModel::fundamental_field(const AlgebraElement& x, const Vec& p) const {
  CVec z = to_complex(p);
  CVec zeta(m_ + 1);
  zeta[0] = 1.0;
  zeta.tail(m_) = z;
  CVec w = alg_.matrix_of(x.coeff) * zeta;
  CVec out(m_);
  for (int k = 0; k < m_; ++k) out[k] = w[k + 1] - z[k] * w[0];
  return to_real(out);
}

Vec FubiniStudyModel::fundamental_field_derivative(const AlgebraElement& x, const Vec& p,
                                                   const Vec& v) const {
  CVec z = to_complex(p);
  CVec vc = to_complex(v);
  CVec zeta(m_ + 1), vtil(m_ + 1);
  zeta[0] = 1.0;
  zeta.tail(m_) = z;
  vtil[0] = 0.0;
  vtil.tail(m_) = vc;
  CMat xm = alg_.matrix_of(x.coeff);
  CVec w = xm * zeta, wv = xm * vtil;
  CVec field(m_), dfield(m_);
  for (int k = 0; k < m_; ++k) {
    field[k] = w[k + 1] - z[k] * w[0];
    dfield[k] = wv[k + 1] - vc[k] * w[0] - z[k] * wv[0];
  }
  CVec corr = holomorphic_gamma(z, vc, field);
  return to_real(dfield + corr);
}

// --------------------------------------------------------------- helpers

std::vector<Mat> fd_christoffel(const SpaceModel& model, const Vec& p, double h,
                                bool richardson) {
  int n = model.dim();
  auto grad_metric = [&](double step) {
    std::vector<Mat> dg(n);
    for (int k = 0; k < n; ++k) {
      Vec pp = p, pm = p;
      pp[k] += step;
      pm[k] -= step;
      dg[k] = (model.metric(pp) - model.metric(pm)) / (2.0 * step);
    }
    return dg;
  };
  std::vector<Mat> dg = grad_metric(h);
  if (richardson) {
    std::vector<Mat> dg2 = grad_metric(h / 2.0);
    for (int k = 0; k < n; ++k) dg[k] = (4.0 * dg2[k] - dg[k]) / 3.0;
  }
  Mat ginv = model.metric(p).inverse();
  std::vector<Mat> gamma(n, Mat::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l)
          acc += 0.5 * ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        gamma[k](i, j) = acc;
      }
  return gamma;
}

Rank4 fd_riemann(const SpaceModel& model, const Vec& p, double h) {
  int n = model.dim();
  std::vector<std::vector<Mat>> dgamma(n);
  for (int a = 0; a < n; ++a) {
    Vec pp = p, pm = p;
    pp[a] += h;
    pm[a] -= h;
    auto gp = model.christoffel(pp), gm = model.christoffel(pm);
    dgamma[a].resize(n);
    for (int k = 0; k < n; ++k) dgamma[a][k] = (gp[k] - gm[k]) / (2.0 * h);
  }
  auto gamma = model.christoffel(p);
  Mat g = model.metric(p);
  Rank4 r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Vec up(n);
        for (int l = 0; l < n; ++l) {
          double v = dgamma[i][l](j, k) - dgamma[j][l](i, k);
          for (int m = 0; m < n; ++m)
            v += gamma[l](i, m) * gamma[m](j, k) - gamma[l](j, m) * gamma[m](i, k);
          up[l] = v;
        }
        Vec low = g * up;
        for (int l = 0; l < n; ++l) r(i, j, k, l) = low[l];
      }
  return r;
}

std::unique_ptr<SpaceModel> make_model(const std::string& name) {
  if (name.rfind("euclid:", 0) == 0) {
    int n = 0;
    try {
      n = std::stoi(name.substr(7));
    } catch (const std::exception&) {
      throw input_error("bad euclidean dimension in model string: " + name);
    }
    return std::make_unique<EuclideanModel>(n);
  }
  if (name.size() >= 2 && name[0] == 's') {
    try {
      return std::make_unique<SphereModel>(std::stoi(name.substr(1)));
    } catch (const input_error&) {
      throw;
    } catch (const std::exception&) {
      throw input_error("unknown model string: " + name);
    }
  }
  if (name.rfind("cp", 0) == 0) {
    try {
      return std::make_unique<FubiniStudyModel>(std::stoi(name.substr(2)));
    } catch (const input_error&) {
      throw;
    } catch (const std::exception&) {
      throw input_error("unknown model string: " + name);
    }
  }
  throw input_error("unknown model string: " + name);
}

}  // namespace minlab
