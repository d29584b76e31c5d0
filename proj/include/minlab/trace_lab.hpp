#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "minlab/berger.hpp"
#include "minlab/common.hpp"
#include "minlab/hodge.hpp"
#include "minlab/immersion.hpp"
#include "minlab/space_model.hpp"
#include "minlab/spectrum.hpp"

namespace minlab {

// Trace laboratory: Killing-field test families along an immersed
// hypersurface, their index-form Gram matrices, and the closed-form integrals
// the Gram traces must reproduce. All quadrature is periodic trapezoid on the
// immersion grid; Killing covariant derivatives come from the ambient model's
// closed forms, never from finite differences.

// ---------------------------------------------------------------------------
// Isometry-algebra frames.

// Orthonormal basis of the ambient isometry algebra under the scaled Killing
// inner product (the scaling that makes fundamental fields of orthonormal
// elements unit vectors), together with the induced basis of its exterior
// square. With an orthonormal ground basis the wedge Gram is the identity.
struct WedgeBasis {
  const LieAlgebraBasis* algebra = nullptr;
  Mat ortho;                               // column a = coefficients of theta_a
  std::vector<std::pair<int, int>> pairs;  // (i, j), i < j, lexicographic
  Mat gram;                                // wedge inner product of the pairs

  int algebra_dim() const { return static_cast<int>(ortho.cols()); }
  int dim() const { return static_cast<int>(pairs.size()); }
  AlgebraElement element(int a) const { return AlgebraElement{ortho.col(a)}; }
};

// Throws input_error when the model carries no isometry-algebra data.
WedgeBasis make_wedge_basis(const SpaceModel& model);

// <x^y, z^w> = <x,z><y,w> - <x,w><y,z> for chart vectors under the metric g.
double wedge_inner(const Mat& g, const Vec& x, const Vec& y, const Vec& z, const Vec& w);

// Basis columns (orthonormal in the scaled Killing gram) of the +1 / -1
// eigenspaces of the involution attached to chart point p. The -1 eigenspace
// maps isomorphically onto the tangent space through fundamental fields; the
// +1 eigenspace generates the isotropy, whose fields vanish at p.
Mat isotropy_space_basis(const SpaceModel& model, const Vec& p);
Mat normal_space_basis(const SpaceModel& model, const Vec& p);

// ---------------------------------------------------------------------------
// Test families along an immersion.

enum class TestFamily {
  psi_algebra,   // psi_X = <T, X-dagger>, X over the isometry algebra
  phi_wedge,     // phi_{X^Y} = <nu ^ T, X-dagger ^ Y-dagger>
  euclid_wedge,  // phi over parallel frames of the model's flat embedding
};

std::string family_name(TestFamily family);

// Ambient chart components (one row per node) of a tangent field given by
// surface chart components, pushed through the immersion differential.
Mat push_tangent(const ParametricImmersion& imm, const Mat& surface_field);

// psi_X(node) = <t_field, X-dagger> under the ambient metric. t_field holds
// ambient chart components, one row per node.
Vec psi_function(const ParametricImmersion& imm, const Mat& t_field, const AlgebraElement& x);

// phi_{X^Y}(node) = <nu ^ t_field, X-dagger ^ Y-dagger> under the ambient
// metric, with nu the unit normal of the extrinsic data.
Vec phi_function(const ParametricImmersion& imm, const ExtrinsicData& ext, const Mat& t_field,
                 const AlgebraElement& x, const AlgebraElement& y);

// Euclidean variant: <nu ^ t_field, e_i ^ e_j> in the model's flat embedding,
// whose parallel frames e_i replace the Killing fields. Requires an embedded
// model (embed_dim > 0); throws input_error otherwise.
Vec euclid_phi_function(const ParametricImmersion& imm, const ExtrinsicData& ext,
                        const Mat& t_field, int i, int j);

// ---------------------------------------------------------------------------
// Index form and Gram assembly.

// Q(u, v) = int <grad u, grad v> - (Ric(nu,nu) + |A|^2) u v dmu by periodic
// trapezoid quadrature with fourth-order nodal gradients. Agrees with the
// negative mass pairing of the strong operator to discretization order.
double index_form_q(const ParametricImmersion& imm, const ExtrinsicData& ext, const Vec& u,
                    const Vec& v);

// Gram matrices of a test family for T = sharp of a discrete one-form:
// gram_q under the index form, gram_l under the L2 pairing, their traces,
// and the matching closed-form integral with its residual.
struct QuadraticFormReport {
  TestFamily family = TestFamily::phi_wedge;
  std::string t_descriptor;
  Mat gram_q;
  Mat gram_l;
  double trace_q = 0.0;
  double trace_l = 0.0;
  double rhs_value = 0.0;  // matching trace-formula integral
  double residual = 0.0;   // |trace_q - rhs_value|
};

QuadraticFormReport assemble_quadratic_form(TestFamily family, const ParametricImmersion& imm,
                                            const ExtrinsicData& ext, const DiscreteOneForm& omega,
                                            const WedgeBasis& basis,
                                            const std::string& t_descriptor = "harmonic");

// Convenience overload building the wedge basis from the immersion's ambient
// model (euclid_wedge ignores the algebra and uses the flat embedding).
QuadraticFormReport assemble_quadratic_form(TestFamily family, const ParametricImmersion& imm,
                                            const ExtrinsicData& ext, const DiscreteOneForm& omega,
                                            const std::string& t_descriptor = "harmonic");

// ---------------------------------------------------------------------------
// Closed-form trace integrals.

// Pointwise pairing <B(x,y), B(z,w)> of the second fundamental form of the
// step from the ambient model into an outer space, for chart vectors at chart
// point p. A default-constructed (null) pairing means a totally geodesic step
// (B = 0), the case where the ambient model is itself the outer space.
using SecondFormPairing =
    std::function<double(const Vec& p, const Vec& x, const Vec& y, const Vec& z, const Vec& w)>;

// Pairing of the round unit sphere inside flat space: <B(x,y), B(z,w)> =
// g(x,y) g(z,w). Requires a model with a flat embedding.
SecondFormPairing unit_sphere_pairing(const SpaceModel& model);

// Trace of the algebra family's Gram, as a curvature integral. `general`
// holds the any-dimension form; for two-dimensional surfaces the two
// equivalent surface reductions are also evaluated (one written through the
// normal Ricci term, one through scalar curvature) and must agree pointwise.
// `middle` is the second-fundamental-form pairing of the ambient-into-outer
// step; `outer_flat` drops the outer curvature terms (flat outer space).
struct TraceRhsOne {
  double general = 0.0;
  double surface_normal = 0.0;
  double surface_scalar = 0.0;
  bool surface_forms = false;
};

TraceRhsOne rhs_trace_formula_one(const ParametricImmersion& imm, const ExtrinsicData& ext,
                                  const DiscreteOneForm& omega,
                                  const SecondFormPairing& middle = nullptr,
                                  bool outer_flat = false);

// Trace of the wedge family's Gram, as two independently assembled
// quadratures: `frame` combines curvature terms over an orthonormal surface
// frame, `gauss` is the equivalent pure second-fundamental-form expression
// obtained by substituting the Gauss equation. Both vanish identically when
// the middle step is totally geodesic.
struct TraceRhsTwo {
  double frame = 0.0;
  double gauss = 0.0;
};

TraceRhsTwo rhs_trace_formula_two(const ParametricImmersion& imm, const ExtrinsicData& ext,
                                  const DiscreteOneForm& omega,
                                  const SecondFormPairing& middle = nullptr,
                                  bool outer_flat = false);

// ---------------------------------------------------------------------------
// Flat-embedding comparison.

// Closed-form beta of the round sphere step S^m(radius) inside flat space for
// a unit tangent direction: -2 (m - 2) / radius^2 with m the sphere dimension.
double beta_euclid_sphere(int sphere_dim, double radius);

// Wedge-family traces computed through the model's flat embedding, alongside
// the algebra-wedge trace and the closed-form correction linking the two:
// euclid trace = algebra trace + beta * int |omega|^2.
struct EuclidTraceReport {
  QuadraticFormReport euclid;   // family euclid_wedge; rhs_value = frame form
  QuadraticFormReport algebra;  // family phi_wedge over the isometry algebra
  double gauss_form = 0.0;      // pure second-fundamental-form trace value
  double beta_closed_form = 0.0;
  double omega_norm2 = 0.0;     // int |omega|^2 dmu
  double comparison_rhs = 0.0;  // algebra trace + beta * omega_norm2
  double comparison_residual = 0.0;
};

// Implemented for immersions whose ambient model is a unit sphere with a flat
// embedding and isometry-algebra data; throws input_error otherwise.
EuclidTraceReport euclid_trace(const ParametricImmersion& imm, const ExtrinsicData& ext,
                               const DiscreteOneForm& omega);

// ---------------------------------------------------------------------------
// Strong-form identity for the wedge family.

// At a grid node p, the strong operator applied to phi_{omega-sharp, X^Y}
// with X, Y in the -1 involution eigenspace at p equals
//   2 h(nabla_{(X-dagger)-tan} omega-sharp, (Y-dagger)-tan)
// - 2 h(nabla_{(Y-dagger)-tan} omega-sharp, (X-dagger)-tan),
// where h is the scalar second fundamental form and -tan the tangential
// projection. lhs applies the discrete operator of the given scheme to the
// phi grid function; rhs evaluates the closed form from the stored
// one-form derivative and the extrinsic data.
struct JacobiPhiCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

JacobiPhiCheck jacobi_of_phi_check(const ParametricImmersion& imm, const ExtrinsicData& ext,
                                   const DiscreteOneForm& omega, const AlgebraElement& x,
                                   const AlgebraElement& y, std::ptrdiff_t node,
                                   Scheme scheme = Scheme::fourier);

// ---------------------------------------------------------------------------
// Commuting-derivative membership.

// A harmonic one-form belongs to the distinguished subspace when the shape
// operator commutes with the covariant derivative of its sharp at every
// point. The discrete surrogate reports the worst nodal commutator norm and
// compares it against the stated tolerance; membership is tolerance-based,
// never an exact kernel statement.
struct MembershipReport {
  bool is_member = false;
  double max_commutator_norm = 0.0;
  double tolerance = 0.0;
};

MembershipReport h1_membership(const ParametricImmersion& imm, const ExtrinsicData& ext,
                               const DiscreteOneForm& omega, double tolerance = 1e-6);

// ---------------------------------------------------------------------------
// Index bound constants.

// Exact rational constant in lowest terms.
struct RationalConstant {
  long long num = 0;
  long long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// 2 / (d(d-1) + 2(2n-3)) for algebra dimension d and ambient dimension n.
// Requires d >= 1 and n >= 2.
RationalConstant index_bound_constant(int d, int n);

// 2 / (d(d-1)), the affine companion bounding index + nullity. Requires d >= 2.
RationalConstant affine_bound_constant(int d);

// index >= c * b1, decided in exact integer arithmetic.
bool bound_check(long long index, long long b1, const RationalConstant& c);

}  // namespace minlab
