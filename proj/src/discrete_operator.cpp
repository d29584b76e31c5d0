#include "minlab/discrete_operator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "minlab/grid.hpp"

namespace minlab {

namespace {

struct GaussPoint {
  double x = 0.0;
  double w = 0.0;
};

// 2-point Gauss rule on [0, 1].
const std::array<GaussPoint, 2> kGauss2 = {
    GaussPoint{0.5 - 0.5 / std::sqrt(3.0), 0.5},
    GaussPoint{0.5 + 0.5 / std::sqrt(3.0), 0.5},
};

// 3-point Gauss rule on [0, 1].
const std::array<GaussPoint, 3> kGauss3 = {
    GaussPoint{0.5 - 0.5 * std::sqrt(0.6), 5.0 / 18.0},
    GaussPoint{0.5, 8.0 / 18.0},
    GaussPoint{0.5 + 0.5 * std::sqrt(0.6), 5.0 / 18.0},
};

// Bilinear hat values on the unit square, corner order (0,0),(1,0),(0,1),(1,1).
std::array<double, 4> hat_values(double xi, double eta) {
  return {(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), (1.0 - xi) * eta, xi * eta};
}

std::array<double, 4> hat_dxi(double eta) {
  return {-(1.0 - eta), 1.0 - eta, -eta, eta};
}

std::array<double, 4> hat_deta(double xi) {
  return {-(1.0 - xi), -xi, 1.0 - xi, xi};
}

Vec nodal_gradient_coefficient(const ParametricImmersion& imm, int entry) {
  const auto& inv = imm.induced_metric_inverse();
  return imm.area_element().array() * inv.col(entry).array();
}

DiscreteOperator conservative_2d(const ParametricImmersion& imm) {
  const PeriodicGrid& g = imm.grid();
  const int n1 = g.n(0);
  const int n2 = g.n(1);
  const double h1 = g.h(0);
  const double h2 = g.h(1);

  const Vec c11 = nodal_gradient_coefficient(imm, 0);
  const Vec c12 = nodal_gradient_coefficient(imm, 1);
  const Vec c22 = nodal_gradient_coefficient(imm, 3);

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(n1) * n2 * 64);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const std::array<std::size_t, 4> id = {g.index(i, j), g.index(i + 1, j),
                                             g.index(i, j + 1), g.index(i + 1, j + 1)};
      for (const auto& qx : kGauss2) {
        for (const auto& qy : kGauss2) {
          const auto val = hat_values(qx.x, qy.x);
          const auto dxi = hat_dxi(qy.x);
          const auto deta = hat_deta(qx.x);
          double a11 = 0.0;
          double a12 = 0.0;
          double a22 = 0.0;
          for (int a = 0; a < 4; ++a) {
            a11 += val[a] * c11(id[a]);
            a12 += val[a] * c12(id[a]);
            a22 += val[a] * c22(id[a]);
          }
          const double w = qx.w * qy.w * h1 * h2;
          for (int a = 0; a < 4; ++a) {
            const double gxa = dxi[a] / h1;
            const double gya = deta[a] / h2;
            for (int b = 0; b < 4; ++b) {
              const double gxb = dxi[b] / h1;
              const double gyb = deta[b] / h2;
              const double k = w * (a11 * gxa * gxb + a12 * (gxa * gyb + gya * gxb) +
                                    a22 * gya * gyb);
              trips.emplace_back(static_cast<int>(id[a]), static_cast<int>(id[b]), k);
            }
          }
        }
      }
    }
  }

  DiscreteOperator op;
  op.size = g.size();
  op.stiffness = SpMat(static_cast<long>(op.size), static_cast<long>(op.size));
  op.stiffness.setFromTriplets(trips.begin(), trips.end());
  op.mass = imm.area_element() * (h1 * h2);
  op.potential = Vec::Zero(static_cast<long>(op.size));
  return op;
}

DiscreteOperator conservative_1d(const ParametricImmersion& imm) {
  const PeriodicGrid& g = imm.grid();
  const int n = g.n(0);
  const double h = g.h(0);
  const Vec c = nodal_gradient_coefficient(imm, 0);

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(n) * 4);
  for (int i = 0; i < n; ++i) {
    const auto a = static_cast<int>(g.index(i));
    const auto b = static_cast<int>(g.index(i + 1));
    const double k = 0.5 * (c(a) + c(b)) / h;
    trips.emplace_back(a, a, k);
    trips.emplace_back(b, b, k);
    trips.emplace_back(a, b, -k);
    trips.emplace_back(b, a, -k);
  }

  DiscreteOperator op;
  op.size = g.size();
  op.stiffness = SpMat(n, n);
  op.stiffness.setFromTriplets(trips.begin(), trips.end());
  op.mass = imm.area_element() * h;
  op.potential = Vec::Zero(n);
  return op;
}

SpMat axis_diff_matrix(const PeriodicGrid& g, int axis) {
  const Mat d = collocation_diff_matrix(g.n(axis));
  const auto size = static_cast<long>(g.size());
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(size) * g.n(axis));
  for (int i = 0; i < g.n(0); ++i) {
    const int jmax = g.dim() == 2 ? g.n(1) : 1;
    for (int j = 0; j < jmax; ++j) {
      const auto row = static_cast<int>(g.index(i, j));
      const int m = g.n(axis);
      for (int s = 0; s < m; ++s) {
        const double v = axis == 0 ? d(i, s) : d(j, s);
        if (v == 0.0) continue;
        const auto col = static_cast<int>(axis == 0 ? g.index(s, j) : g.index(i, s));
        trips.emplace_back(row, col, v);
      }
    }
  }
  SpMat out(size, size);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

DiscreteOperator fourier_scheme(const ParametricImmersion& imm) {
  const PeriodicGrid& g = imm.grid();
  for (int axis = 0; axis < g.dim(); ++axis) {
    if (g.n(axis) % 2 == 0) {
      throw input_error("fourier scheme requires odd grid sizes");
    }
  }

  const double cellw = g.dim() == 2 ? g.h(0) * g.h(1) : g.h(0);
  DiscreteOperator op;
  op.size = g.size();
  SpMat k;
  if (g.dim() == 1) {
    const SpMat d = axis_diff_matrix(g, 0);
    const Vec c = nodal_gradient_coefficient(imm, 0) * cellw;
    k = SpMat(d.transpose() * c.asDiagonal() * d);
  } else {
    const SpMat d1 = axis_diff_matrix(g, 0);
    const SpMat d2 = axis_diff_matrix(g, 1);
    const Vec c11 = nodal_gradient_coefficient(imm, 0) * cellw;
    const Vec c12 = nodal_gradient_coefficient(imm, 1) * cellw;
    const Vec c22 = nodal_gradient_coefficient(imm, 3) * cellw;
    k = SpMat(d1.transpose() * c11.asDiagonal() * d1);
    k += SpMat(d1.transpose() * c12.asDiagonal() * d2);
    k += SpMat(d2.transpose() * c12.asDiagonal() * d1);
    k += SpMat(d2.transpose() * c22.asDiagonal() * d2);
  }
  op.stiffness = SpMat(0.5 * (k + SpMat(k.transpose())));
  op.mass = imm.area_element() * cellw;
  op.potential = Vec::Zero(static_cast<long>(op.size));
  return op;
}

// Nodes stay in the basis only where their chart's weight is healthy; the
// blended basis is renormalized by its pointwise sum during assembly, so
// dropping fringe nodes keeps constants exactly representable.
constexpr double kKeepWeight = 0.35;

// Cell activity for quadrature: a cell is integrated when some quadrature
// point carries positive weight.
bool cell_active(const TwoChartSphereImmersion& imm, int chart, double x0, double y0,
                 double spacing) {
  for (const auto& qx : kGauss3) {
    for (const auto& qy : kGauss3) {
      Vec y{{x0 + qx.x * spacing, y0 + qy.x * spacing}};
      if (imm.weight(chart, y) > 0.0) return true;
    }
  }
  return false;
}

std::vector<char> active_cells(const TwoChartSphereImmersion& imm, int chart, int n,
                               double extent, double spacing) {
  std::vector<char> active(static_cast<std::size_t>(n - 1) * (n - 1), 0);
  const double support = imm.support_radius();
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      const double x0 = -extent + i * spacing;
      const double y0 = -extent + j * spacing;
      const double cx = std::clamp(0.0, x0, x0 + spacing);
      const double cy = std::clamp(0.0, y0, y0 + spacing);
      if (std::hypot(cx, cy) >= support) continue;
      active[static_cast<std::size_t>(i) * (n - 1) + j] =
          cell_active(imm, chart, x0, y0, spacing) ? 1 : 0;
    }
  }
  return active;
}

}  // namespace

SpMat DiscreteOperator::form_matrix() const {
  const auto n = static_cast<long>(size);
  std::vector<Triplet> trips;
  trips.reserve(size);
  for (long i = 0; i < n; ++i) {
    trips.emplace_back(static_cast<int>(i), static_cast<int>(i), -potential(i) * mass(i));
  }
  SpMat p(n, n);
  p.setFromTriplets(trips.begin(), trips.end());
  return SpMat(stiffness + p);
}

double DiscreteOperator::form(const Vec& u, const Vec& v) const {
  if (u.size() != static_cast<long>(size) || v.size() != static_cast<long>(size)) {
    throw input_error("operator pairing needs vectors matching the node count");
  }
  return u.dot(stiffness * v) -
         (potential.array() * mass.array() * u.array() * v.array()).sum();
}

Vec DiscreteOperator::apply(const Vec& u) const {
  if (u.size() != static_cast<long>(size)) {
    throw input_error("operator application needs a vector matching the node count");
  }
  Vec f = stiffness * u - (potential.array() * mass.array() * u.array()).matrix();
  return f.array() / mass.array();
}

DiscreteOperator laplace_beltrami(const ParametricImmersion& imm, Scheme scheme) {
  if (scheme == Scheme::fourier) return fourier_scheme(imm);
  return imm.domain_dim() == 2 ? conservative_2d(imm) : conservative_1d(imm);
}

Vec jacobi_potential(const ParametricImmersion& imm, const ExtrinsicData& ext) {
  const auto n = static_cast<long>(imm.grid().size());
  Vec pot(n);
  for (long k = 0; k < n; ++k) {
    const Vec nu = ext.normal.row(k);
    const Mat ric = imm.ambient().ricci(imm.position().row(k));
    pot(k) = nu.dot(ric * nu) + ext.a_norm2(k);
  }
  return pot;
}

DiscreteOperator jacobi_operator(const ParametricImmersion& imm, const ExtrinsicData& ext,
                                 Scheme scheme) {
  DiscreteOperator op = laplace_beltrami(imm, scheme);
  op.potential = jacobi_potential(imm, ext);
  return op;
}

TwoChartGrid two_chart_grid(const TwoChartSphereImmersion& imm, int n) {
  if (n < 9) throw input_error("two-chart grid needs at least 9 nodes per side");

  TwoChartGrid grid;
  grid.n = n;
  grid.extent = 1.05 * imm.support_radius();
  grid.spacing = 2.0 * grid.extent / (n - 1);
  grid.node_id.assign(2, std::vector<std::ptrdiff_t>(static_cast<std::size_t>(n) * n, -1));

  std::vector<Vec> params;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Vec y{{-grid.extent + i * grid.spacing, -grid.extent + j * grid.spacing}};
        if (imm.weight(c, y) < kKeepWeight) continue;
        grid.node_id[c][static_cast<std::size_t>(i) * n + j] =
            static_cast<std::ptrdiff_t>(params.size());
        grid.chart.push_back(c);
        params.push_back(y);
      }
    }
  }

  const auto total = static_cast<long>(params.size());
  grid.params = Mat(total, 2);
  grid.positions = Mat(total, imm.ambient().dim());
  for (long k = 0; k < total; ++k) {
    grid.params.row(k) = params[static_cast<std::size_t>(k)];
    grid.positions.row(k) = imm.position(grid.chart[static_cast<std::size_t>(k)],
                                         params[static_cast<std::size_t>(k)]);
  }
  return grid;
}

DiscreteOperator two_chart_laplace(const TwoChartSphereImmersion& imm,
                                   const TwoChartGrid& grid) {
  const int n = grid.n;
  const double spacing = grid.spacing;
  const double support = imm.support_radius();
  const double r = imm.radius();

  struct LocalEntry {
    std::ptrdiff_t id;
    double val;
    double gx;
    double gy;
  };

  std::vector<Triplet> trips;
  Vec massv = Vec::Zero(static_cast<long>(grid.size()));
  std::vector<LocalEntry> local;
  local.reserve(8);

  for (int c = 0; c < 2; ++c) {
    const auto active = active_cells(imm, c, n, grid.extent, spacing);
    for (int i = 0; i + 1 < n; ++i) {
      for (int j = 0; j + 1 < n; ++j) {
        if (active[static_cast<std::size_t>(i) * (n - 1) + j] == 0) continue;
        const double x0 = -grid.extent + i * spacing;
        const double y0 = -grid.extent + j * spacing;
        const std::array<std::ptrdiff_t, 4> own = {
            grid.node_id[c][static_cast<std::size_t>(i) * n + j],
            grid.node_id[c][static_cast<std::size_t>(i + 1) * n + j],
            grid.node_id[c][static_cast<std::size_t>(i) * n + j + 1],
            grid.node_id[c][static_cast<std::size_t>(i + 1) * n + j + 1]};

        for (const auto& qx : kGauss3) {
          for (const auto& qy : kGauss3) {
            const Vec y{{x0 + qx.x * spacing, y0 + qy.x * spacing}};
            const double chi = imm.weight(c, y);
            if (chi <= 0.0) continue;
            const Vec dchi = imm.weight_gradient(c, y);
            const double wq = qx.w * qy.w * spacing * spacing;

            local.clear();
            const auto val = hat_values(qx.x, qy.x);
            const auto dxi = hat_dxi(qy.x);
            const auto deta = hat_deta(qx.x);
            for (int a = 0; a < 4; ++a) {
              if (own[a] < 0) continue;
              const double gx = dxi[a] / spacing;
              const double gy = deta[a] / spacing;
              local.push_back({own[a], chi * val[a], chi * gx + val[a] * dchi(0),
                               chi * gy + val[a] * dchi(1)});
            }

            const Vec yt = TwoChartSphereImmersion::transition(y);
            if (yt.norm() < support) {
              const int o = 1 - c;
              const double chio = imm.weight(o, yt);
              const Vec dchio = imm.weight_gradient(o, yt);
              if (chio > 0.0 || dchio.squaredNorm() > 0.0) {
                const Mat dt = TwoChartSphereImmersion::transition_differential(y);
                int ki = static_cast<int>(std::floor((yt(0) + grid.extent) / spacing));
                int kj = static_cast<int>(std::floor((yt(1) + grid.extent) / spacing));
                ki = std::clamp(ki, 0, n - 2);
                kj = std::clamp(kj, 0, n - 2);
                const std::array<std::ptrdiff_t, 4> other = {
                    grid.node_id[o][static_cast<std::size_t>(ki) * n + kj],
                    grid.node_id[o][static_cast<std::size_t>(ki + 1) * n + kj],
                    grid.node_id[o][static_cast<std::size_t>(ki) * n + kj + 1],
                    grid.node_id[o][static_cast<std::size_t>(ki + 1) * n + kj + 1]};
                const double xio = (yt(0) + grid.extent) / spacing - ki;
                const double etao = (yt(1) + grid.extent) / spacing - kj;
                const auto valo = hat_values(xio, etao);
                const auto dxio = hat_dxi(etao);
                const auto detao = hat_deta(xio);
                for (int a = 0; a < 4; ++a) {
                  if (other[a] < 0) continue;
                  const double gx = chio * dxio[a] / spacing + valo[a] * dchio(0);
                  const double gy = chio * detao[a] / spacing + valo[a] * dchio(1);
                  const Vec pulled = dt.transpose() * Vec{{gx, gy}};
                  local.push_back({other[a], chio * valo[a], pulled(0), pulled(1)});
                }
              }
            }

            double sum = 0.0;
            double sum_gx = 0.0;
            double sum_gy = 0.0;
            for (const auto& e : local) {
              sum += e.val;
              sum_gx += e.gx;
              sum_gy += e.gy;
            }
            if (sum < 0.2) {
              throw numeric_error("two-chart basis lost coverage at a quadrature point");
            }
            for (auto& e : local) {
              const double v0 = e.val;
              e.val = v0 / sum;
              e.gx = e.gx / sum - v0 * sum_gx / (sum * sum);
              e.gy = e.gy / sum - v0 * sum_gy / (sum * sum);
            }

            const double t = 1.0 + y.squaredNorm();
            const double sqrtg = 4.0 * r * r / (t * t);
            for (const auto& ea : local) {
              massv(ea.id) += wq * chi * ea.val * sqrtg;
              for (const auto& eb : local) {
                trips.emplace_back(static_cast<int>(ea.id), static_cast<int>(eb.id),
                                   wq * chi * (ea.gx * eb.gx + ea.gy * eb.gy));
              }
            }
          }
        }
      }
    }
  }

  DiscreteOperator op;
  op.size = grid.size();
  op.stiffness = SpMat(static_cast<long>(op.size), static_cast<long>(op.size));
  op.stiffness.setFromTriplets(trips.begin(), trips.end());
  op.mass = massv;
  op.potential = Vec::Zero(static_cast<long>(op.size));
  return op;
}

DiscreteOperator two_chart_jacobi(const TwoChartSphereImmersion& imm,
                                  const TwoChartGrid& grid) {
  DiscreteOperator op = two_chart_laplace(imm, grid);
  for (long k = 0; k < static_cast<long>(op.size); ++k) {
    op.potential(k) =
        imm.potential(grid.chart[static_cast<std::size_t>(k)], grid.params.row(k));
  }
  return op;
}

}  // namespace minlab
