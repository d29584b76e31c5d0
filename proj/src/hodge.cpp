#include "minlab/hodge.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "minlab/grid.hpp"

namespace minlab {

namespace {

struct GaussPoint {
  double x;
  double w;
};

// 2-point Gauss rule on [0, 1].
constexpr std::array<GaussPoint, 2> kGauss2 = {
    GaussPoint{0.5 - 0.28867513459481287, 0.5},
    GaussPoint{0.5 + 0.28867513459481287, 0.5}};

// Staggered complex on the periodic chart: values on nodes, edge integrals on
// links, face integrals on cells. Coboundaries are exact, the inner products
// carry the induced metric, and the coclosedness operator is the exact adjoint
// of the node coboundary, so the space of harmonic edge fields has exactly the
// topological dimension.
struct HodgeComplex {
  Eigen::Index edges = 0;
  SpMat d0;      // nodes -> edges, exact difference
  SpMat d1;      // edges -> faces, exact oriented cell sum (2d only)
  SpMat m1;      // edge inner product with metric coupling
  Vec m0;        // node weights
  Vec m2;        // face weights (2d only)
  SpMat cycles;  // fundamental-cycle period functionals on edge fields
  SpMat energy;  // closedness + coclosedness quadratic form
};

HodgeComplex build_complex(const ParametricImmersion& imm) {
  const PeriodicGrid& g = imm.grid();
  const Vec& area = imm.area_element();
  HodgeComplex cx;

  if (g.dim() == 1) {
    const int n = g.n(0);
    const double h = g.h(0);
    const auto nn = static_cast<Eigen::Index>(g.size());
    cx.edges = nn;

    std::vector<Triplet> d0t, m1t, cyct;
    for (int i = 0; i < n; ++i) {
      const auto e = static_cast<int>(g.index(i));
      const auto a = static_cast<int>(g.index(i));
      const auto b = static_cast<int>(g.index(i + 1));
      d0t.emplace_back(e, b, 1.0);
      d0t.emplace_back(e, a, -1.0);
      // Edge weight of the unit-integral link field: average of 1/sqrt(g).
      const double c = 0.5 * (1.0 / area(a) + 1.0 / area(b)) / h;
      m1t.emplace_back(e, e, c);
      cyct.emplace_back(0, e, 1.0);
    }
    cx.d0 = SpMat(nn, nn);
    cx.d0.setFromTriplets(d0t.begin(), d0t.end());
    cx.m1 = SpMat(nn, nn);
    cx.m1.setFromTriplets(m1t.begin(), m1t.end());
    cx.cycles = SpMat(1, nn);
    cx.cycles.setFromTriplets(cyct.begin(), cyct.end());
    cx.m0 = area * h;

    const Vec m0inv = cx.m0.cwiseInverse();
    const SpMat dtm = SpMat(cx.d0.transpose() * cx.m1);
    cx.energy = SpMat(dtm.transpose() * SpMat(m0inv.asDiagonal() * dtm));
    return cx;
  }

  const int n1 = g.n(0);
  const int n2 = g.n(1);
  const double h1 = g.h(0);
  const double h2 = g.h(1);
  const auto nn = static_cast<Eigen::Index>(g.size());
  cx.edges = 2 * nn;

  std::vector<Triplet> d0t, d1t, m1t, cyct;
  d0t.reserve(static_cast<std::size_t>(4 * nn));
  d1t.reserve(static_cast<std::size_t>(4 * nn));
  m1t.reserve(static_cast<std::size_t>(16 * nn));
  cx.m2 = Vec::Zero(nn);

  const auto h_edge = [&](int i, int j) { return static_cast<int>(g.index(i, j)); };
  const auto v_edge = [&](int i, int j) {
    return static_cast<int>(nn + static_cast<Eigen::Index>(g.index(i, j)));
  };

  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const auto node = static_cast<int>(g.index(i, j));
      d0t.emplace_back(h_edge(i, j), static_cast<int>(g.index(i + 1, j)), 1.0);
      d0t.emplace_back(h_edge(i, j), node, -1.0);
      d0t.emplace_back(v_edge(i, j), static_cast<int>(g.index(i, j + 1)), 1.0);
      d0t.emplace_back(v_edge(i, j), node, -1.0);

      // Counterclockwise boundary of the cell with lower corner (i, j).
      d1t.emplace_back(node, h_edge(i, j), 1.0);
      d1t.emplace_back(node, v_edge(i + 1, j), 1.0);
      d1t.emplace_back(node, h_edge(i, j + 1), -1.0);
      d1t.emplace_back(node, v_edge(i, j), -1.0);
    }
  }

  // Edge inner product from bilinear link fields against the interpolated
  // sqrt(g) g^{mu nu} coefficient, cell by cell.
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const std::array<std::size_t, 4> corner = {g.index(i, j), g.index(i + 1, j),
                                                 g.index(i, j + 1), g.index(i + 1, j + 1)};
      std::array<Mat, 4> cmat;
      std::array<double, 4> av;
      for (int c = 0; c < 4; ++c) {
        cmat[static_cast<std::size_t>(c)] =
            area(static_cast<Eigen::Index>(corner[static_cast<std::size_t>(c)])) *
            imm.metric_inverse_at(corner[static_cast<std::size_t>(c)]);
        av[static_cast<std::size_t>(c)] =
            area(static_cast<Eigen::Index>(corner[static_cast<std::size_t>(c)]));
      }
      const std::array<int, 4> edge = {h_edge(i, j), h_edge(i, j + 1), v_edge(i, j),
                                       v_edge(i + 1, j)};
      for (const auto& gx : kGauss2) {
        for (const auto& gy : kGauss2) {
          const double x = gx.x, y = gy.x;
          const std::array<double, 4> shape = {(1 - x) * (1 - y), x * (1 - y), (1 - x) * y,
                                               x * y};
          Mat c = Mat::Zero(2, 2);
          double a_interp = 0.0;
          for (int k = 0; k < 4; ++k) {
            c += shape[static_cast<std::size_t>(k)] * cmat[static_cast<std::size_t>(k)];
            a_interp += shape[static_cast<std::size_t>(k)] * av[static_cast<std::size_t>(k)];
          }
          // Link fields in covariant chart components at this point.
          const std::array<Vec, 4> w = {Vec{{(1 - y) / h1, 0.0}}, Vec{{y / h1, 0.0}},
                                        Vec{{0.0, (1 - x) / h2}}, Vec{{0.0, x / h2}}};
          const double wq = gx.w * gy.w * h1 * h2;
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
              const double v = wq * w[static_cast<std::size_t>(a)].dot(
                                        c * w[static_cast<std::size_t>(b)]);
              if (v != 0.0)
                m1t.emplace_back(edge[static_cast<std::size_t>(a)],
                                 edge[static_cast<std::size_t>(b)], v);
            }
          cx.m2(static_cast<Eigen::Index>(g.index(i, j))) += gx.w * gy.w / (a_interp * h1 * h2);
        }
      }
    }
  }

  for (int i = 0; i < n1; ++i) cyct.emplace_back(0, h_edge(i, 0), 1.0);
  for (int j = 0; j < n2; ++j) cyct.emplace_back(1, v_edge(0, j), 1.0);

  cx.d0 = SpMat(cx.edges, nn);
  cx.d0.setFromTriplets(d0t.begin(), d0t.end());
  cx.d1 = SpMat(nn, cx.edges);
  cx.d1.setFromTriplets(d1t.begin(), d1t.end());
  cx.m1 = SpMat(cx.edges, cx.edges);
  cx.m1.setFromTriplets(m1t.begin(), m1t.end());
  cx.cycles = SpMat(2, cx.edges);
  cx.cycles.setFromTriplets(cyct.begin(), cyct.end());
  cx.m0 = area * (h1 * h2);

  const Vec m0inv = cx.m0.cwiseInverse();
  const SpMat dtm = SpMat(cx.d0.transpose() * cx.m1);
  cx.energy = SpMat(cx.d1.transpose() * SpMat(cx.m2.asDiagonal() * cx.d1)) +
              SpMat(dtm.transpose() * SpMat(m0inv.asDiagonal() * dtm));
  return cx;
}

// Nodal views of an edge field: covariant components from incident-edge
// averages, the metric dual, and its covariant derivative from 4th-order
// stencils plus the induced Christoffel symbols.
DiscreteOneForm nodal_views(const ParametricImmersion& imm, const Mat& gamma,
                            const Vec& cochain) {
  const PeriodicGrid& g = imm.grid();
  const int d = g.dim();
  const auto nn = static_cast<Eigen::Index>(g.size());

  DiscreteOneForm form;
  form.cochain = cochain;
  form.components = Mat::Zero(nn, d);
  if (d == 1) {
    const double h = g.h(0);
    for (Eigen::Index k = 0; k < nn; ++k) {
      const int i = g.i_of(static_cast<std::size_t>(k));
      form.components(k, 0) = (cochain(static_cast<Eigen::Index>(g.index(i - 1))) +
                               cochain(static_cast<Eigen::Index>(g.index(i)))) /
                              (2.0 * h);
    }
  } else {
    const double h1 = g.h(0);
    const double h2 = g.h(1);
    for (Eigen::Index k = 0; k < nn; ++k) {
      const int i = g.i_of(static_cast<std::size_t>(k));
      const int j = g.j_of(static_cast<std::size_t>(k));
      form.components(k, 0) = (cochain(static_cast<Eigen::Index>(g.index(i - 1, j))) +
                               cochain(static_cast<Eigen::Index>(g.index(i, j)))) /
                              (2.0 * h1);
      form.components(k, 1) = (cochain(nn + static_cast<Eigen::Index>(g.index(i, j - 1))) +
                               cochain(nn + static_cast<Eigen::Index>(g.index(i, j)))) /
                              (2.0 * h2);
    }
  }

  form.sharp = Mat::Zero(nn, d);
  for (Eigen::Index k = 0; k < nn; ++k) {
    form.sharp.row(k) = (imm.metric_inverse_at(static_cast<std::size_t>(k)) *
                         form.components.row(k).transpose())
                            .transpose();
  }

  form.nabla_sharp = Mat::Zero(nn, d * d);
  for (int nu = 0; nu < d; ++nu) {
    for (int mu = 0; mu < d; ++mu) {
      const Vec dT = apply_diff(g, mu, 1, 4, form.sharp.col(nu));
      for (Eigen::Index k = 0; k < nn; ++k) {
        double v = dT(k);
        for (int al = 0; al < d; ++al)
          v += gamma(k, (nu * d + mu) * d + al) * form.sharp(k, al);
        form.nabla_sharp(k, mu * d + nu) = v;
      }
    }
  }
  return form;
}

}  // namespace

HarmonicBasisReport harmonic_basis(const ParametricImmersion& imm) {
  const PeriodicGrid& g = imm.grid();
  for (int axis = 0; axis < g.dim(); ++axis) {
    if (g.n(axis) < 8)
      throw input_error("harmonic basis needs at least 8 nodes per axis");
  }

  const HodgeComplex cx = build_complex(imm);
  const int b1 = g.dim();
  const Eigen::Index e = cx.edges;

  // Minimize the closedness + coclosedness energy over edge fields with
  // prescribed periods. The energy kernel meets the constraints in exactly
  // one point, so the stationarity system is nonsingular and the minimum is
  // zero: the solution is closed and coclosed, not merely stationary.
  std::vector<Triplet> kkt;
  kkt.reserve(static_cast<std::size_t>(cx.energy.nonZeros()) + 4 * static_cast<std::size_t>(e));
  for (int col = 0; col < cx.energy.outerSize(); ++col)
    for (SpMat::InnerIterator it(cx.energy, col); it; ++it)
      kkt.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int col = 0; col < cx.cycles.outerSize(); ++col)
    for (SpMat::InnerIterator it(cx.cycles, col); it; ++it) {
      kkt.emplace_back(static_cast<int>(e + it.row()), static_cast<int>(it.col()), it.value());
      kkt.emplace_back(static_cast<int>(it.col()), static_cast<int>(e + it.row()), it.value());
    }
  SpMat system(e + b1, e + b1);
  system.setFromTriplets(kkt.begin(), kkt.end());
  system.makeCompressed();

  Eigen::SparseLU<SpMat> solver;
  solver.compute(system);
  if (solver.info() != Eigen::Success)
    throw numeric_error("harmonic form system factorization failed");

  Eigen::SimplicialLDLT<SpMat> m1_solver(cx.m1);
  if (m1_solver.info() != Eigen::Success)
    throw numeric_error("edge inner product factorization failed");

  const Mat gamma = induced_christoffels(imm);

  HarmonicBasisReport report;
  report.betti1 = b1;
  report.periods = Mat::Zero(b1, b1);
  for (int c = 0; c < b1; ++c) {
    Vec rhs = Vec::Zero(e + b1);
    rhs(e + c) = 1.0;
    const Vec sol = solver.solve(rhs);
    if (solver.info() != Eigen::Success)
      throw numeric_error("harmonic form solve failed");
    const Vec w = sol.head(e);

    report.periods.row(c) = (cx.cycles * w).transpose();
    const Vec resid = cx.energy * w;
    const Vec lap = m1_solver.solve(resid);
    report.laplacian_residual =
        std::max(report.laplacian_residual, std::sqrt(std::max(0.0, lap.dot(resid))));

    report.forms.push_back(nodal_views(imm, gamma, w));
  }
  return report;
}

HarmonicBasisReport harmonic_basis(const TwoChartSphereImmersion&) {
  return HarmonicBasisReport{};
}

Mat l2_gram(const ParametricImmersion& imm, const std::vector<DiscreteOneForm>& forms) {
  const auto m = static_cast<Eigen::Index>(forms.size());
  Mat gram(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a; b < m; ++b) {
      const Vec field = (forms[static_cast<std::size_t>(a)].components.array() *
                         forms[static_cast<std::size_t>(b)].sharp.array())
                            .rowwise()
                            .sum()
                            .matrix()
                            .cwiseProduct(imm.area_element());
      gram(a, b) = gram(b, a) = integrate(imm.grid(), field);
    }
  }
  return gram;
}

void orthonormalize_l2(const ParametricImmersion& imm, std::vector<DiscreteOneForm>& forms) {
  const auto combine = [](DiscreteOneForm& f, const DiscreteOneForm& other, double c) {
    f.components -= c * other.components;
    f.sharp -= c * other.sharp;
    f.nabla_sharp -= c * other.nabla_sharp;
    f.cochain -= c * other.cochain;
  };
  const auto scale = [](DiscreteOneForm& f, double c) {
    f.components *= c;
    f.sharp *= c;
    f.nabla_sharp *= c;
    f.cochain *= c;
  };

  for (std::size_t i = 0; i < forms.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const std::vector<DiscreteOneForm> pair = {forms[i], forms[j]};
      const Mat gram = l2_gram(imm, pair);
      combine(forms[i], forms[j], gram(0, 1));
    }
    const std::vector<DiscreteOneForm> self = {forms[i]};
    const double norm2 = l2_gram(imm, self)(0, 0);
    if (norm2 <= 0.0) throw numeric_error("harmonic basis degenerated during orthonormalization");
    scale(forms[i], 1.0 / std::sqrt(norm2));
  }
}

Vec bochner_residual_field(const ParametricImmersion& imm, const ExtrinsicData& ext,
                           const DiscreteOneForm& omega) {
  const PeriodicGrid& g = imm.grid();
  const int d = g.dim();
  const auto nn = static_cast<Eigen::Index>(g.size());
  const Vec& area = imm.area_element();
  const Mat& ginv = imm.induced_metric_inverse();
  const SpaceModel& ambient = imm.ambient();

  // |T|^2 and its chart Laplacian, conservative form at 4th order.
  const Vec s =
      (omega.components.array() * omega.sharp.array()).rowwise().sum().matrix();
  std::vector<Vec> ds(static_cast<std::size_t>(d));
  for (int nu = 0; nu < d; ++nu) ds[static_cast<std::size_t>(nu)] = apply_diff(g, nu, 1, 4, s);
  Vec div = Vec::Zero(nn);
  for (int mu = 0; mu < d; ++mu) {
    Vec flux = Vec::Zero(nn);
    for (int nu = 0; nu < d; ++nu)
      flux += area.cwiseProduct(ginv.col(mu * d + nu)).cwiseProduct(ds[static_cast<std::size_t>(nu)]);
    div += apply_diff(g, mu, 1, 4, flux);
  }
  const Vec lap = div.cwiseQuotient(area);

  Vec residual(nn);
  for (Eigen::Index k = 0; k < nn; ++k) {
    const auto node = static_cast<std::size_t>(k);
    const Mat gm = imm.metric_at(node);
    const Mat gi = imm.metric_inverse_at(node);
    const Vec t = omega.sharp.row(k).transpose();

    // |nabla T|^2 with both slots contracted through the induced metric.
    Mat ns(d, d);
    for (int mu = 0; mu < d; ++mu)
      for (int nu = 0; nu < d; ++nu) ns(mu, nu) = omega.nabla_sharp(k, mu * d + nu);
    const double grad2 = (gi * ns * gm * ns.transpose()).trace();

    // Ambient curvature contraction over a metric-orthonormal tangent frame.
    const Vec p = imm.position().row(k).transpose();
    const Mat gamb = ambient.metric(p);
    Vec t_amb = Vec::Zero(ambient.dim());
    std::vector<Vec> frame(static_cast<std::size_t>(d));
    for (int mu = 0; mu < d; ++mu) {
      frame[static_cast<std::size_t>(mu)] = imm.differential(mu).row(k).transpose();
      t_amb += t(mu) * frame[static_cast<std::size_t>(mu)];
    }
    double curv = 0.0;
    for (int mu = 0; mu < d; ++mu)
      for (int nu = 0; nu < d; ++nu) {
        if (gi(mu, nu) == 0.0) continue;
        const Vec r = ambient.curvature(p, t_amb, frame[static_cast<std::size_t>(mu)],
                                        frame[static_cast<std::size_t>(nu)]);
        curv += gi(mu, nu) * (gamb * r).dot(t_amb);
      }

    // Second-fundamental-form terms; the trace term vanishes when minimal.
    const Mat a = ext.a_at(node, d);
    const Vec at = a * t;
    const double term_a = at.dot(gi * at);
    const double att = t.dot(a * t);
    const double rhs = curv + ext.mean_curvature(k) * att - term_a;

    residual(k) = std::abs(0.5 * lap(k) - grad2 - rhs);
  }
  return residual;
}

double bochner_check(const ParametricImmersion& imm, const ExtrinsicData& ext,
                     const DiscreteOneForm& omega, std::size_t node) {
  return bochner_residual_field(imm, ext, omega)(static_cast<Eigen::Index>(node));
}

}  // namespace minlab
