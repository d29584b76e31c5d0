#pragma once

#include <functional>
#include <vector>

#include "minlab/space_model.hpp"

namespace minlab {

// Splitting of the isometry algebra at a point into the +1/-1 eigenspaces
// of the point involution. Columns are coefficient vectors, orthonormal for
// the scaled algebra inner product.
struct CartanDecomposition {
  Vec base_point;   // chart coordinates
  Mat involution;   // d x d
  Mat k_basis;      // d x dim_k, isotropy part
  Mat n_basis;      // d x dim_n, tangent part
  Mat gram_scaled;  // d x d inner product used for orthonormalization

  int dim_k() const { return static_cast<int>(k_basis.cols()); }
  int dim_n() const { return static_cast<int>(n_basis.cols()); }
};

CartanDecomposition cartan_decompose(const SpaceModel& model, const Vec& p);

// max over basis pairs of the component of [a,b] outside the expected part.
struct BracketInclusionResiduals {
  double kk_in_k;
  double kn_in_n;
  double nn_in_k;
  double k_orth_n;
};
BracketInclusionResiduals bracket_inclusion_residuals(const SpaceModel& model,
                                                      const CartanDecomposition& dec);

// Finite-difference covariant derivative of a chart vector field.
Vec fd_covariant_derivative(const SpaceModel& model,
                            const std::function<Vec(const Vec&)>& field, const Vec& p,
                            const Vec& v, double h = 1e-5);

}  // namespace minlab
