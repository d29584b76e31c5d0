#include "minlab/trace_lab.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace minlab {

namespace {

// Coefficient columns of a basis of the isometry algebra that is orthonormal
// under the model's scaled gram: with gram = L L^T, the columns of L^{-T}.
Mat gram_orthonormal_columns(const SpaceModel& model) {
  if (model.group() == nullptr) {
    throw input_error("model carries no isometry-algebra data");
  }
  const Mat gram = model.scaled_gram();
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw numeric_error("algebra gram is not positive definite");
  }
  const Mat l = llt.matrixL();
  return l.transpose()
      .triangularView<Eigen::Upper>()
      .solve(Mat::Identity(gram.rows(), gram.cols()));
}

// Columns spanning the eigenspace of the algebra involution at p for the
// eigenvalue of the given sign, orthonormal under the scaled gram.
Mat involution_eigenspace(const SpaceModel& model, const Vec& p, double sign) {
  const Mat ortho = gram_orthonormal_columns(model);
  const Mat gram = model.scaled_gram();
  Mat sym = ortho.transpose() * gram * model.involution_on_algebra(p) * ortho;
  sym = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.info() != Eigen::Success) {
    throw numeric_error("involution eigendecomposition failed");
  }
  const Vec vals = es.eigenvalues();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (std::abs(std::abs(vals(i)) - 1.0) > 1e-6) {
      throw numeric_error("algebra involution has a non-unit eigenvalue");
    }
    if (vals(i) * sign > 0.0) keep.push_back(i);
  }
  Mat out(ortho.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = ortho * es.eigenvectors().col(keep[c]);
  }
  return out;
}

Vec row_dot(const Mat& a, const Mat& b) {
  return (a.array() * b.array()).rowwise().sum();
}

// Nodal values of every test function of a family. t_amb holds the ambient
// chart components of the dual field of the chosen one-form.
std::vector<Vec> family_functions(TestFamily family, const ParametricImmersion& imm,
                                  const ExtrinsicData& ext, const Mat& t_amb,
                                  const WedgeBasis* basis) {
  const SpaceModel& model = imm.ambient();
  const std::size_t nodes = imm.grid().size();
  const Eigen::Index n = static_cast<Eigen::Index>(nodes);
  const int m = imm.chart_dim();
  std::vector<Vec> funcs;

  if (family == TestFamily::euclid_wedge) {
    const int me = model.embed_dim();
    if (me == 0) {
      throw input_error("flat-embedding family requires an embedded model");
    }
    Mat nu_hat(n, me);
    Mat t_hat(n, me);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Vec p = imm.position().row(k);
      const Mat de = model.embed_differential(p);
      nu_hat.row(k) = (de * ext.normal.row(k).transpose()).transpose();
      t_hat.row(k) = (de * t_amb.row(k).transpose()).transpose();
    }
    for (int i = 0; i < me; ++i) {
      for (int j = i + 1; j < me; ++j) {
        funcs.push_back(nu_hat.col(i).cwiseProduct(t_hat.col(j)) -
                        t_hat.col(i).cwiseProduct(nu_hat.col(j)));
      }
    }
    return funcs;
  }

  if (basis == nullptr || basis->algebra == nullptr) {
    throw input_error("algebra test family requires a wedge basis");
  }
  Mat t_cov(n, m);
  Mat nu_cov(n, m);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vec p = imm.position().row(k);
    const Mat g = model.metric(p);
    t_cov.row(k) = (g * t_amb.row(k).transpose()).transpose();
    nu_cov.row(k) = (g * ext.normal.row(k).transpose()).transpose();
  }
  const int da = basis->algebra_dim();
  std::vector<Vec> tdot(static_cast<std::size_t>(da));
  std::vector<Vec> ndot(static_cast<std::size_t>(da));
  Mat dagger(n, m);
  for (int a = 0; a < da; ++a) {
    const AlgebraElement x = basis->element(a);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Vec p = imm.position().row(k);
      dagger.row(k) = model.fundamental_field(x, p).transpose();
    }
    tdot[static_cast<std::size_t>(a)] = row_dot(dagger, t_cov);
    ndot[static_cast<std::size_t>(a)] = row_dot(dagger, nu_cov);
  }
  if (family == TestFamily::psi_algebra) {
    for (int a = 0; a < da; ++a) funcs.push_back(tdot[static_cast<std::size_t>(a)]);
    return funcs;
  }
  for (const auto& [i, j] : basis->pairs) {
    const auto si = static_cast<std::size_t>(i);
    const auto sj = static_cast<std::size_t>(j);
    funcs.push_back(ndot[si].cwiseProduct(tdot[sj]) - tdot[si].cwiseProduct(ndot[sj]));
  }
  return funcs;
}

// Index-form and L2 Gram matrices of a list of grid functions, sharing one
// potential evaluation and one gradient pass per function.
void gram_matrices(const ParametricImmersion& imm, const ExtrinsicData& ext,
                   const std::vector<Vec>& funcs, Mat* gram_q, Mat* gram_l) {
  const PeriodicGrid& grid = imm.grid();
  const int d = imm.domain_dim();
  const Mat& ginv = imm.induced_metric_inverse();
  const Vec& area = imm.area_element();
  const Vec pot = jacobi_potential(imm, ext);
  const auto nf = static_cast<Eigen::Index>(funcs.size());

  std::vector<std::array<Vec, 2>> grads(funcs.size());
  for (std::size_t f = 0; f < funcs.size(); ++f) {
    for (int axis = 0; axis < d; ++axis) {
      grads[f][static_cast<std::size_t>(axis)] = apply_diff(grid, axis, 1, 4, funcs[f]);
    }
  }
  gram_q->setZero(nf, nf);
  gram_l->setZero(nf, nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    for (Eigen::Index b = a; b < nf; ++b) {
      const auto sa = static_cast<std::size_t>(a);
      const auto sb = static_cast<std::size_t>(b);
      Vec grad = Vec::Zero(area.size());
      for (int mu = 0; mu < d; ++mu) {
        for (int nu = 0; nu < d; ++nu) {
          grad += ginv.col(mu * d + nu)
                      .cwiseProduct(grads[sa][static_cast<std::size_t>(mu)])
                      .cwiseProduct(grads[sb][static_cast<std::size_t>(nu)]);
        }
      }
      const Vec prod = funcs[sa].cwiseProduct(funcs[sb]);
      const double q = integrate(grid, (grad - pot.cwiseProduct(prod)).cwiseProduct(area));
      const double l = integrate(grid, prod.cwiseProduct(area));
      (*gram_q)(a, b) = q;
      (*gram_q)(b, a) = q;
      (*gram_l)(a, b) = l;
      (*gram_l)(b, a) = l;
    }
  }
}

QuadraticFormReport assemble_impl(TestFamily family, const ParametricImmersion& imm,
                                  const ExtrinsicData& ext, const DiscreteOneForm& omega,
                                  const WedgeBasis* basis, const std::string& t_descriptor) {
  const Mat t_amb = push_tangent(imm, omega.sharp);
  const std::vector<Vec> funcs = family_functions(family, imm, ext, t_amb, basis);
  QuadraticFormReport report;
  report.family = family;
  report.t_descriptor = t_descriptor;
  gram_matrices(imm, ext, funcs, &report.gram_q, &report.gram_l);
  report.trace_q = report.gram_q.trace();
  report.trace_l = report.gram_l.trace();
  switch (family) {
    case TestFamily::psi_algebra:
      report.rhs_value = rhs_trace_formula_one(imm, ext, omega).general;
      break;
    case TestFamily::phi_wedge:
      report.rhs_value = rhs_trace_formula_two(imm, ext, omega).frame;
      break;
    case TestFamily::euclid_wedge:
      report.rhs_value =
          rhs_trace_formula_two(imm, ext, omega, unit_sphere_pairing(imm.ambient()), true)
              .frame;
      break;
  }
  report.residual = std::abs(report.trace_q - report.rhs_value);
  return report;
}

struct TraceIntegrals {
  double general = 0.0;
  double surface_normal = 0.0;
  double surface_scalar = 0.0;
  double frame = 0.0;
  double gauss = 0.0;
  bool surface_forms = false;
};

// Nodal evaluation and quadrature of every closed-form trace integrand. All
// forms share the orthonormal surface frame, so they are built in one pass.
TraceIntegrals trace_integrals(const ParametricImmersion& imm, const ExtrinsicData& ext,
                               const DiscreteOneForm& omega, const SecondFormPairing& middle,
                               bool outer_flat) {
  const SpaceModel& model = imm.ambient();
  const PeriodicGrid& grid = imm.grid();
  const int d = imm.domain_dim();
  const int m = imm.chart_dim();
  const auto n = static_cast<Eigen::Index>(grid.size());
  const Mat t_amb = push_tangent(imm, omega.sharp);
  const bool surface = (d == 2 && m == 3);

  Vec gen(n);
  Vec sn = Vec::Zero(n);
  Vec ss = Vec::Zero(n);
  Vec fr(n);
  Vec ga(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto node = static_cast<std::size_t>(k);
    const Vec p = imm.position().row(k);
    const Mat g = model.metric(p);
    const Mat gs = imm.metric_at(node);
    Eigen::LLT<Mat> llt(gs);
    if (llt.info() != Eigen::Success) {
      throw numeric_error("induced metric is not positive definite");
    }
    Mat fcols(m, d);
    for (int mu = 0; mu < d; ++mu) {
      fcols.col(mu) = imm.differential(mu).row(k).transpose();
    }
    // Orthonormal tangent frame of the immersed surface, chart components.
    const Mat frame = llt.matrixL().solve(fcols.transpose()).transpose();

    const Vec nu = ext.normal.row(k).transpose();
    const Vec t = t_amb.row(k).transpose();
    const double t2 = t.dot(g * t);
    const double ric_nn = nu.dot(model.ricci(p) * nu);

    const Mat h = ext.a_at(node, d);
    const Vec ts = omega.sharp.row(k).transpose();
    const Vec ht = h * ts;
    const double sum_a2 = ht.dot(llt.solve(ht));
    const double a2 = ext.a_norm2(k);

    const auto curv = [&](const Vec& x, const Vec& y, const Vec& z, const Vec& w) {
      return w.dot(g * model.curvature(p, x, y, z));
    };
    const auto pair_mid = [&](const Vec& x, const Vec& y, const Vec& z, const Vec& w) {
      return middle ? middle(p, x, y, z, w) : 0.0;
    };

    double r_tt = 0.0;      // sum over the frame of <R(t,e)e,t>
    double r_nn = 0.0;      // sum over the frame of <R(nu,e)e,nu>
    double b_tt = 0.0;      // sum of |B(e,t)|^2
    double b_nn = 0.0;      // sum of |B(e,nu)|^2
    double b_tr_t = 0.0;    // sum of <B(e,e), B(t,t)>
    double b_tr_n = 0.0;    // sum of <B(e,e), B(nu,nu)>
    for (int mu = 0; mu < d; ++mu) {
      const Vec e = frame.col(mu);
      r_tt += curv(t, e, e, t);
      r_nn += curv(nu, e, e, nu);
      b_tt += pair_mid(e, t, e, t);
      b_nn += pair_mid(e, nu, e, nu);
      b_tr_t += pair_mid(e, e, t, t);
      b_tr_n += pair_mid(e, e, nu, nu);
    }
    const double r_out_tt = outer_flat ? 0.0 : r_tt;
    const double r_out_nn = outer_flat ? 0.0 : r_nn;

    gen(k) = (2.0 * sum_a2 - a2 * t2 - ric_nn * t2) + b_tt - r_tt + r_out_tt;
    fr(k) = (b_tt + b_nn * t2) - (r_tt + ric_nn * t2) + (r_out_tt + r_out_nn * t2);
    ga(k) = 2.0 * (b_tt + b_nn * t2) - (b_tr_t + b_tr_n * t2);
    if (surface) {
      sn(k) = -ric_nn * t2 + 2.0 * b_tt - b_tr_t;
      ss(k) = b_tt - 0.5 * model.scalar_curvature(p) * t2 + r_out_tt;
    }
  }
  const Vec& area = imm.area_element();
  TraceIntegrals out;
  out.general = integrate(grid, gen.cwiseProduct(area));
  out.frame = integrate(grid, fr.cwiseProduct(area));
  out.gauss = integrate(grid, ga.cwiseProduct(area));
  out.surface_forms = surface;
  if (surface) {
    out.surface_normal = integrate(grid, sn.cwiseProduct(area));
    out.surface_scalar = integrate(grid, ss.cwiseProduct(area));
  }
  return out;
}

}  // namespace

WedgeBasis make_wedge_basis(const SpaceModel& model) {
  WedgeBasis basis;
  basis.algebra = model.group();
  basis.ortho = gram_orthonormal_columns(model);
  const int da = static_cast<int>(basis.ortho.cols());
  for (int i = 0; i < da; ++i) {
    for (int j = i + 1; j < da; ++j) basis.pairs.emplace_back(i, j);
  }
  const Mat inner = basis.ortho.transpose() * model.scaled_gram() * basis.ortho;
  const auto nd = static_cast<Eigen::Index>(basis.pairs.size());
  basis.gram.resize(nd, nd);
  for (Eigen::Index a = 0; a < nd; ++a) {
    const auto [i, j] = basis.pairs[static_cast<std::size_t>(a)];
    for (Eigen::Index b = 0; b < nd; ++b) {
      const auto [k, l] = basis.pairs[static_cast<std::size_t>(b)];
      basis.gram(a, b) = inner(i, k) * inner(j, l) - inner(i, l) * inner(j, k);
    }
  }
  return basis;
}

double wedge_inner(const Mat& g, const Vec& x, const Vec& y, const Vec& z, const Vec& w) {
  const double xz = x.dot(g * z);
  const double yw = y.dot(g * w);
  const double xw = x.dot(g * w);
  const double yz = y.dot(g * z);
  return xz * yw - xw * yz;
}

Mat isotropy_space_basis(const SpaceModel& model, const Vec& p) {
  return involution_eigenspace(model, p, +1.0);
}

Mat normal_space_basis(const SpaceModel& model, const Vec& p) {
  return involution_eigenspace(model, p, -1.0);
}

std::string family_name(TestFamily family) {
  switch (family) {
    case TestFamily::psi_algebra:
      return "psi-algebra";
    case TestFamily::phi_wedge:
      return "phi-wedge";
    case TestFamily::euclid_wedge:
      return "euclid-wedge";
  }
  throw input_error("unknown test family");
}

Mat push_tangent(const ParametricImmersion& imm, const Mat& surface_field) {
  const int d = imm.domain_dim();
  const auto n = static_cast<Eigen::Index>(imm.grid().size());
  if (surface_field.rows() != n || surface_field.cols() != d) {
    throw input_error("surface field must have one row per node and one column per axis");
  }
  Mat out = Mat::Zero(n, imm.chart_dim());
  for (int mu = 0; mu < d; ++mu) {
    out.array() += imm.differential(mu).array().colwise() * surface_field.col(mu).array();
  }
  return out;
}

Vec psi_function(const ParametricImmersion& imm, const Mat& t_field, const AlgebraElement& x) {
  const auto n = static_cast<Eigen::Index>(imm.grid().size());
  if (t_field.rows() != n || t_field.cols() != imm.chart_dim()) {
    throw input_error("tangent field must hold ambient components, one row per node");
  }
  const SpaceModel& model = imm.ambient();
  Vec out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vec p = imm.position().row(k);
    const Vec dagger = model.fundamental_field(x, p);
    out(k) = t_field.row(k) * (model.metric(p) * dagger);
  }
  return out;
}

Vec phi_function(const ParametricImmersion& imm, const ExtrinsicData& ext, const Mat& t_field,
                 const AlgebraElement& x, const AlgebraElement& y) {
  const auto n = static_cast<Eigen::Index>(imm.grid().size());
  if (t_field.rows() != n || t_field.cols() != imm.chart_dim()) {
    throw input_error("tangent field must hold ambient components, one row per node");
  }
  const SpaceModel& model = imm.ambient();
  Vec out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vec p = imm.position().row(k);
    const Mat g = model.metric(p);
    const Vec dx = model.fundamental_field(x, p);
    const Vec dy = model.fundamental_field(y, p);
    const Vec nu = ext.normal.row(k).transpose();
    const Vec t = t_field.row(k).transpose();
    out(k) = wedge_inner(g, nu, t, dx, dy);
  }
  return out;
}

Vec euclid_phi_function(const ParametricImmersion& imm, const ExtrinsicData& ext,
                        const Mat& t_field, int i, int j) {
  const SpaceModel& model = imm.ambient();
  const int me = model.embed_dim();
  if (me == 0) {
    throw input_error("flat-embedding family requires an embedded model");
  }
  if (i < 0 || j < 0 || i >= me || j >= me) {
    throw input_error("frame indices out of range for the flat embedding");
  }
  const auto n = static_cast<Eigen::Index>(imm.grid().size());
  if (t_field.rows() != n || t_field.cols() != imm.chart_dim()) {
    throw input_error("tangent field must hold ambient components, one row per node");
  }
  Vec out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vec p = imm.position().row(k);
    const Mat de = model.embed_differential(p);
    const Vec nu_hat = de * ext.normal.row(k).transpose();
    const Vec t_hat = de * t_field.row(k).transpose();
    out(k) = nu_hat(i) * t_hat(j) - nu_hat(j) * t_hat(i);
  }
  return out;
}

double index_form_q(const ParametricImmersion& imm, const ExtrinsicData& ext, const Vec& u,
                    const Vec& v) {
  const PeriodicGrid& grid = imm.grid();
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (u.size() != n || v.size() != n) {
    throw input_error("index form arguments must be nodal grid functions");
  }
  const int d = imm.domain_dim();
  const Mat& ginv = imm.induced_metric_inverse();
  const Vec pot = jacobi_potential(imm, ext);
  std::array<Vec, 2> du;
  std::array<Vec, 2> dv;
  for (int axis = 0; axis < d; ++axis) {
    du[static_cast<std::size_t>(axis)] = apply_diff(grid, axis, 1, 4, u);
    dv[static_cast<std::size_t>(axis)] = apply_diff(grid, axis, 1, 4, v);
  }
  Vec grad = Vec::Zero(n);
  for (int mu = 0; mu < d; ++mu) {
    for (int nu = 0; nu < d; ++nu) {
      grad += ginv.col(mu * d + nu)
                  .cwiseProduct(du[static_cast<std::size_t>(mu)])
                  .cwiseProduct(dv[static_cast<std::size_t>(nu)]);
    }
  }
  const Vec field = grad - pot.cwiseProduct(u.cwiseProduct(v));
  return integrate(grid, field.cwiseProduct(imm.area_element()));
}

QuadraticFormReport assemble_quadratic_form(TestFamily family, const ParametricImmersion& imm,
                                            const ExtrinsicData& ext,
                                            const DiscreteOneForm& omega,
                                            const WedgeBasis& basis,
                                            const std::string& t_descriptor) {
  return assemble_impl(family, imm, ext, omega, &basis, t_descriptor);
}

QuadraticFormReport assemble_quadratic_form(TestFamily family, const ParametricImmersion& imm,
                                            const ExtrinsicData& ext,
                                            const DiscreteOneForm& omega,
                                            const std::string& t_descriptor) {
  if (family == TestFamily::euclid_wedge) {
    return assemble_impl(family, imm, ext, omega, nullptr, t_descriptor);
  }
  const WedgeBasis basis = make_wedge_basis(imm.ambient());
  return assemble_impl(family, imm, ext, omega, &basis, t_descriptor);
}

SecondFormPairing unit_sphere_pairing(const SpaceModel& model) {
  const std::string kind = model.kind();
  const bool sphere = kind.size() >= 2 && kind[0] == 's' &&
                      std::isdigit(static_cast<unsigned char>(kind[1])) != 0 &&
                      model.embed_dim() == model.dim() + 1;
  if (!sphere) {
    throw input_error("flat-embedding pairing requires a round unit sphere model");
  }
  const SpaceModel* m = &model;
  return [m](const Vec& p, const Vec& x, const Vec& y, const Vec& z, const Vec& w) {
    const Mat g = m->metric(p);
    return x.dot(g * y) * z.dot(g * w);
  };
}

TraceRhsOne rhs_trace_formula_one(const ParametricImmersion& imm, const ExtrinsicData& ext,
                                  const DiscreteOneForm& omega, const SecondFormPairing& middle,
                                  bool outer_flat) {
  const TraceIntegrals ints = trace_integrals(imm, ext, omega, middle, outer_flat);
  TraceRhsOne out;
  out.general = ints.general;
  out.surface_normal = ints.surface_normal;
  out.surface_scalar = ints.surface_scalar;
  out.surface_forms = ints.surface_forms;
  return out;
}

TraceRhsTwo rhs_trace_formula_two(const ParametricImmersion& imm, const ExtrinsicData& ext,
                                  const DiscreteOneForm& omega, const SecondFormPairing& middle,
                                  bool outer_flat) {
  const TraceIntegrals ints = trace_integrals(imm, ext, omega, middle, outer_flat);
  TraceRhsTwo out;
  out.frame = ints.frame;
  out.gauss = ints.gauss;
  return out;
}

double beta_euclid_sphere(int sphere_dim, double radius) {
  if (sphere_dim < 2) {
    throw input_error("sphere dimension must be at least 2");
  }
  if (!(radius > 0.0)) {
    throw input_error("sphere radius must be positive");
  }
  return -2.0 * static_cast<double>(sphere_dim - 2) / (radius * radius);
}

EuclidTraceReport euclid_trace(const ParametricImmersion& imm, const ExtrinsicData& ext,
                               const DiscreteOneForm& omega) {
  const SpaceModel& model = imm.ambient();
  if (model.group() == nullptr) {
    throw input_error("flat-embedding comparison requires isometry-algebra data");
  }
  // unit_sphere_pairing validates the ambient shape itself.
  const SecondFormPairing pairing = unit_sphere_pairing(model);
  EuclidTraceReport report;
  report.euclid = assemble_quadratic_form(TestFamily::euclid_wedge, imm, ext, omega);
  report.algebra = assemble_quadratic_form(TestFamily::phi_wedge, imm, ext, omega);
  report.gauss_form = rhs_trace_formula_two(imm, ext, omega, pairing, true).gauss;
  report.beta_closed_form = beta_euclid_sphere(model.dim(), 1.0);
  report.omega_norm2 = l2_gram(imm, std::vector<DiscreteOneForm>{omega})(0, 0);
  report.comparison_rhs = report.algebra.trace_q + report.beta_closed_form * report.omega_norm2;
  report.comparison_residual = std::abs(report.euclid.trace_q - report.comparison_rhs);
  return report;
}

JacobiPhiCheck jacobi_of_phi_check(const ParametricImmersion& imm, const ExtrinsicData& ext,
                                   const DiscreteOneForm& omega, const AlgebraElement& x,
                                   const AlgebraElement& y, std::ptrdiff_t node, Scheme scheme) {
  const auto n = static_cast<std::ptrdiff_t>(imm.grid().size());
  if (node < 0 || node >= n) {
    throw input_error("node index out of range");
  }
  const auto k = static_cast<Eigen::Index>(node);
  const SpaceModel& model = imm.ambient();
  const int d = imm.domain_dim();

  const Mat t_amb = push_tangent(imm, omega.sharp);
  const Vec phi = phi_function(imm, ext, t_amb, x, y);
  const DiscreteOperator op = jacobi_operator(imm, ext, scheme);
  const double lhs = -op.apply(phi)(k);

  const Vec p = imm.position().row(k);
  const Mat g = model.metric(p);
  const auto tangential = [&](const Vec& v) {
    Vec cov(d);
    for (int mu = 0; mu < d; ++mu) {
      cov(mu) = imm.differential(mu).row(k) * (g * v);
    }
    return Vec(imm.metric_inverse_at(static_cast<std::size_t>(node)) * cov);
  };
  const auto nabla_along = [&](const Vec& c) {
    Vec out = Vec::Zero(d);
    for (int mu = 0; mu < d; ++mu) {
      for (int a = 0; a < d; ++a) {
        out(a) += c(mu) * omega.nabla_sharp(k, mu * d + a);
      }
    }
    return out;
  };
  const Vec xs = tangential(model.fundamental_field(x, p));
  const Vec ys = tangential(model.fundamental_field(y, p));
  const Mat h = ext.a_at(static_cast<std::size_t>(node), d);
  const double rhs =
      2.0 * nabla_along(xs).dot(h * ys) - 2.0 * nabla_along(ys).dot(h * xs);

  JacobiPhiCheck out;
  out.lhs = lhs;
  out.rhs = rhs;
  out.residual = std::abs(lhs - rhs);
  return out;
}

MembershipReport h1_membership(const ParametricImmersion& imm, const ExtrinsicData& ext,
                               const DiscreteOneForm& omega, double tolerance) {
  if (!(tolerance > 0.0)) {
    throw input_error("membership tolerance must be positive");
  }
  const int d = imm.domain_dim();
  const auto n = static_cast<Eigen::Index>(imm.grid().size());
  double worst = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto node = static_cast<std::size_t>(k);
    const Mat shape = ext.shape_at(node, d);
    // Endomorphism v -> nabla_v of the dual field; row mu of nabla_sharp
    // holds the derivative along axis mu, so the matrix acts by transpose.
    Mat endo(d, d);
    for (int mu = 0; mu < d; ++mu) {
      for (int a = 0; a < d; ++a) {
        endo(a, mu) = omega.nabla_sharp(k, mu * d + a);
      }
    }
    const double norm = (shape * endo - endo * shape).norm();
    worst = std::max(worst, norm);
  }
  MembershipReport report;
  report.max_commutator_norm = worst;
  report.tolerance = tolerance;
  report.is_member = worst <= tolerance;
  return report;
}

namespace {

RationalConstant reduced_ratio(long long num, long long den) {
  const long long g = std::gcd(num, den);
  return RationalConstant{num / g, den / g};
}

}  // namespace

RationalConstant index_bound_constant(int d, int n) {
  if (d < 1) {
    throw input_error("isometry group dimension must be at least 1");
  }
  if (n < 2) {
    throw input_error("ambient dimension must be at least 2");
  }
  const long long dd = d;
  const long long nn = n;
  return reduced_ratio(2, dd * (dd - 1) + 2 * (2 * nn - 3));
}

RationalConstant affine_bound_constant(int d) {
  if (d < 2) {
    throw input_error("isometry group dimension must be at least 2");
  }
  const long long dd = d;
  return reduced_ratio(2, dd * (dd - 1));
}

bool bound_check(long long index, long long b1, const RationalConstant& c) {
  if (c.den <= 0 || c.num <= 0) {
    throw input_error("bound constant must be a positive ratio");
  }
  if (index < 0 || b1 < 0) {
    throw input_error("index and first Betti number must be non-negative");
  }
  return index * c.den >= c.num * b1;
}

}  // namespace minlab