#pragma once

#include <cstddef>
#include <vector>

#include "minlab/common.hpp"
#include "minlab/immersion.hpp"

namespace minlab {

// Weak-form discretization of u -> -div(grad u) - V u on a closed hypersurface.
// stiffness approximates the Dirichlet energy, mass holds diagonal area weights
// per node, and eigenpairs solve (stiffness - diag(potential * mass)) v =
// lambda diag(mass) v, so unstable directions carry negative lambda.
struct DiscreteOperator {
  std::size_t size = 0;
  SpMat stiffness;  // symmetric, constants in the kernel
  Vec mass;         // positive diagonal area weights
  Vec potential;    // nodal zeroth-order coefficient, enters with a minus sign

  // stiffness - diag(potential .* mass)
  SpMat form_matrix() const;
  // u^T form_matrix v, the index form pairing
  double form(const Vec& u, const Vec& v) const;
  // mass-inverse of form_matrix * u, the strong-form action
  Vec apply(const Vec& u) const;
};

enum class Scheme {
  conservative,  // bilinear elements with interpolated metric coefficients
  fourier        // trigonometric collocation derivatives, odd grids only
};

// Laplace-Beltrami operator of the induced metric (zero potential).
DiscreteOperator laplace_beltrami(const ParametricImmersion& imm,
                                  Scheme scheme = Scheme::conservative);

// Nodal stability potential: ambient Ricci on the normal plus squared shape norm.
Vec jacobi_potential(const ParametricImmersion& imm, const ExtrinsicData& ext);

// Jacobi stability operator of a minimal hypersurface.
DiscreteOperator jacobi_operator(const ParametricImmersion& imm, const ExtrinsicData& ext,
                                 Scheme scheme = Scheme::conservative);

// Kept-node bookkeeping for the glued two-chart sphere discretization. Each
// chart carries an n x n lattice over [-extent, extent]^2 and keeps the nodes
// where its own weight is healthy; the other chart covers the remainder.
struct TwoChartGrid {
  int n = 0;
  double extent = 0.0;
  double spacing = 0.0;
  std::vector<int> chart;  // kept node -> owning chart
  Mat params;              // kept node -> own-chart coordinates
  Mat positions;           // kept node -> ambient chart position
  std::vector<std::vector<std::ptrdiff_t>> node_id;  // chart -> lattice slot -> kept id or -1

  std::size_t size() const { return chart.size(); }
};

TwoChartGrid two_chart_grid(const TwoChartSphereImmersion& imm, int n);

// Laplace-Beltrami operator assembled from weight-blended bilinear elements on
// both charts, coupling the charts through the inversion transition map.
DiscreteOperator two_chart_laplace(const TwoChartSphereImmersion& imm,
                                   const TwoChartGrid& grid);

// Jacobi operator on the two-chart sphere with the closed-form potential.
DiscreteOperator two_chart_jacobi(const TwoChartSphereImmersion& imm,
                                  const TwoChartGrid& grid);

}  // namespace minlab
