#pragma once

#include <cstddef>
#include <string>

#include "minlab/common.hpp"
#include "minlab/discrete_operator.hpp"

namespace minlab {

// Lowest eigenpairs of the weak pencil (stiffness - diag(V mass)) v = lambda
// diag(mass) v. index counts lambda < -tol_zero, nullity counts |lambda| <=
// tol_zero; both only see the computed window.
struct SpectrumReport {
  std::size_t size = 0;
  Vec eigenvalues;  // ascending
  Mat vectors;      // columns, orthonormal in the mass inner product
  int index = 0;
  int nullity = 0;
  double tol_zero = 0.0;
  double runtime_ms = 0.0;
  int iterations = 0;  // Krylov steps, zero on the dense path
  std::string method;
};

struct SpectrumOptions {
  enum class Method { automatic, dense, lanczos };
  Method method = Method::automatic;
  int max_lanczos = 0;          // 0 picks max(8k + 80, 200)
  double residual_tol = 1e-10;  // relative Ritz residual target
};

SpectrumReport spectrum(const DiscreteOperator& op, int k, double tol_zero,
                        const SpectrumOptions& options = {});

// Zero-eigenvalue window matched to a second-order scheme at mesh width h,
// widened when the potential dominates the curvature scale.
double suggested_tol_zero(const DiscreteOperator& op, double h);

// Verdict of the equivariant trace test. q_gram and l_gram are the s x s
// matrices of the quadratic forms T -> trace of the index form over the
// derivation family generated by T, and T -> trace of the L2 pairing, on a
// basis of the test subspace. The strict hypothesis asks q_gram < c l_gram in
// the definite order; falling back to negative semidefiniteness still bounds
// the index after removing the pointwise-null directions.
struct CountingLemmaReport {
  int dim_s = 0;
  int dim_g = 0;
  int dim_s_null = 0;
  double c = 0.0;
  double worst_margin = 0.0;       // largest eigenvalue of q_gram - c l_gram
  bool hypothesis_strict = false;  // negative definite within tolerance
  bool hypothesis_weak = false;    // negative semidefinite within tolerance
  int eigenvalues_below_c = 0;     // counted with the report's zero window as guard
  double strict_bound = 0.0;       // dim_s / dim_g, valid when strict holds
  double weak_bound = 0.0;         // (dim_s - dim_s_null) / dim_g, valid when weak holds
  bool strict_bound_met = false;
  bool weak_bound_met = false;
};

CountingLemmaReport counting_lemma_check(const Mat& q_gram, const Mat& l_gram,
                                         const SpectrumReport& report, double c, int dim_g,
                                         int dim_s_null = 0, double tol = 1e-9);

}  // namespace minlab
