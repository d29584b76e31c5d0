#pragma once

#include <functional>
#include <string>
#include <vector>

#include "minlab/common.hpp"
#include "minlab/immersion.hpp"

namespace minlab {

// Simultaneous smooth diagonalization of a commuting pair of symmetric
// (0,2)-tensor fields on a rectangular node patch. The produced frame follows
// the constructive argument: eigen-decompose the first operator into
// constant-multiplicity blocks, diagonalize the second operator inside each
// block, and propagate the resulting joint frame continuously outward from
// the patch center so that eigenvector branches are tracked through
// eigenvalue crossings instead of being relabeled by sort order.

// ---------------------------------------------------------------------------
// Commuting pair on a patch.

// Nodal samples of a metric and two symmetric bilinear fields on an n1 x n2
// rectangle (n2 = 1 for a one-dimensional strip). The patch is an open window
// without wraparound; `spacing` is the node distance used by refinement
// studies, and `coord(i, j)` gives the patch coordinates of a node (centered,
// offset half a step so engineered degeneracy lines fall between nodes).
struct CommutingPair {
  int dim = 0;
  int n1 = 0;
  int n2 = 1;
  double spacing = 0.0;
  std::vector<Mat> metric;  // node-major: index(i, j) = i * n2 + j
  std::vector<Mat> alpha;
  std::vector<Mat> beta;

  int nodes() const { return n1 * n2; }
  int index(int i, int j) const { return i * n2 + j; }
  Mat a_at(int node) const;  // g^{-1} alpha, real spectrum by g-symmetry
  Mat b_at(int node) const;  // g^{-1} beta
  double max_commutator() const;  // worst nodal Frobenius norm of [A, B]
};

// Validating constructor: checks field shapes and symmetry, positive-definite
// metric, and the commutation bound max ||[A,B]|| <= 1e-10 (input_error).
CommutingPair make_commuting_pair(int n1, int n2, double spacing, std::vector<Mat> metric,
                                  std::vector<Mat> alpha, std::vector<Mat> beta);

// Pair sampled from analytic fields over a centered square patch of the given
// extent, with the identity metric: alpha_of/beta_of map patch coordinates
// (u, v) to symmetric matrices. Node coordinates sit at half-step offsets.
CommutingPair field_pair(int n1, int n2, double extent, int dim,
                         const std::function<Mat(double, double)>& alpha_of,
                         const std::function<Mat(double, double)>& beta_of);

// Shape-operator pair of an immersed surface on a node window: metric = the
// induced metric, alpha = beta = the scalar second fundamental form, so both
// operators equal the shape operator. Window bounds are checked against the
// immersion grid (input_error).
CommutingPair shape_operator_pair(const ParametricImmersion& imm, const ExtrinsicData& ext,
                                  int i0, int j0, int n1, int n2);

// ---------------------------------------------------------------------------
// Sorted eigenvalue fields.

// Nodewise ascending eigenvalues of A = g^{-1} alpha. Ascending order makes
// each field continuous across the patch (branch crossings appear as kinks);
// the largest jump between adjacent nodes measures that continuity.
struct EigenvalueFields {
  Mat values;  // nodes x dim, ascending within each row
  double max_adjacent_jump = 0.0;
};

EigenvalueFields sorted_eigenvalue_fields(const CommutingPair& pair);

// ---------------------------------------------------------------------------
// Smooth simultaneous diagonalization.

// Joint orthonormal frame over the patch. frame[node] holds the vectors E_mu
// as columns in patch (chart) components, g-orthonormal at each node;
// kappa_a/kappa_b are the eigenvalue fields along each frame slot, smooth
// branches rather than sorted labels. The smoothness score is the largest
// frame deviation between adjacent nodes after the best sign-and-permutation
// alignment; orientation does not flip between adjacent nodes.
struct SmoothFrameResult {
  std::vector<Mat> frame;
  Mat kappa_a;  // nodes x dim
  Mat kappa_b;
  std::vector<int> multiplicities;  // first-stage block sizes, constant on the patch
  double smoothness_score = 0.0;
  double ortho_residual = 0.0;   // worst |E^T g E - I|
  double eigen_residual = 0.0;   // worst |A E - kappa E| / |B E - kappa E|
};

// Runs the two-stage block algorithm with breadth-first continuity alignment
// seeded at the patch center. Eigenvalues closer than 1e-6 of the patch-wide
// spectral diameter share a block; the first-stage block pattern must be the
// same at every node, otherwise a geometry_error naming the offending node is
// thrown (the patch must then be split, which this module does not attempt).
SmoothFrameResult simultaneous_diagonalize(const CommutingPair& pair);

// Per-node joint eigenvectors in sorted order with canonical signs and no
// continuity alignment: the brute-force oracle the smooth frame is compared
// against (identical up to sign and permutation at every node).
Mat joint_eigenvectors_at(const CommutingPair& pair, int node);

// Smoothness score of the naive sorted-order frame built independently at
// every node (sign alignment only, labels fixed by sort order). Stays O(h) on
// crossing-free patches but jumps O(1) where eigenvalue branches cross.
double naive_frame_score(const CommutingPair& pair);

// Largest column deviation between two g-orthonormal frames after optimal
// sign alignment, optionally also optimizing over slot permutations.
double frame_distance(const Mat& g, const Mat& f1, const Mat& f2, bool allow_permutation);

}  // namespace minlab
