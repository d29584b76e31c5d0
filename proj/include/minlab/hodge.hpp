#pragma once

#include <vector>

#include "minlab/common.hpp"
#include "minlab/immersion.hpp"

namespace minlab {

// Harmonic 1-form on a periodic-chart hypersurface. The solve happens on edge
// integrals of a staggered complex whose coboundaries are exact, so closedness
// and coclosedness hold to solver precision; the nodal coefficient fields and
// the covariant derivative of the dual vector field are derived views used by
// the pointwise curvature identities.
struct DiscreteOneForm {
  Mat components;   // node rows, covariant chart components omega_mu
  Mat sharp;        // node rows, contravariant components of the dual field
  Mat nabla_sharp;  // node rows, d*d row-major, (nabla_mu sharp)^nu
  Vec cochain;      // underlying edge integrals from the Hodge solve
};

struct HarmonicBasisReport {
  std::vector<DiscreteOneForm> forms;  // one per fundamental cycle
  int betti1 = 0;
  Mat periods;                      // forms x cycles period integrals
  double laplacian_residual = 0.0;  // worst L2 norm of the 1-form Laplacian
};

// Harmonic 1-forms with unit periods over the fundamental cycles: two forms
// on a 2d periodic chart (torus), one on a 1d chart (circle). Solved as a
// period-constrained least-squares problem minimizing the closedness plus
// coclosedness energy; the discrete harmonic space has exactly the
// topological dimension, so the minimum is zero and the returned forms are
// discretely closed and coclosed.
HarmonicBasisReport harmonic_basis(const ParametricImmersion& imm);

// Spheres carry no harmonic 1-forms; the report is empty.
HarmonicBasisReport harmonic_basis(const TwoChartSphereImmersion& imm);

// L2 Gram matrix of the dual vector fields over the induced area element.
Mat l2_gram(const ParametricImmersion& imm, const std::vector<DiscreteOneForm>& forms);

// In-place Gram-Schmidt in the L2 inner product; all stored views are
// transformed consistently. Periods are generally not preserved.
void orthonormalize_l2(const ParametricImmersion& imm, std::vector<DiscreteOneForm>& forms);

// Nodewise two-sided evaluation of the traced curvature identity for the dual
// field T of a harmonic form:
//   1/2 Delta |T|^2 - |nabla T|^2
//     = sum_i <R(T, e_i) e_i, T> + H A(T,T) - sum_i |A(e_i, T)|^2,
// where the right side is the intrinsic Ricci term split through the ambient
// curvature and the second fundamental form. The mean-curvature term vanishes
// on minimal hypersurfaces.
Vec bochner_residual_field(const ParametricImmersion& imm, const ExtrinsicData& ext,
                           const DiscreteOneForm& omega);

// |LHS - RHS| of the identity above at one node.
double bochner_check(const ParametricImmersion& imm, const ExtrinsicData& ext,
                     const DiscreteOneForm& omega, std::size_t node);

}  // namespace minlab
