#pragma once

#include <cstdint>
#include <vector>

#include "minlab/common.hpp"

namespace minlab {

// Geodesic hypersphere of radius r in the projective plane, carried entirely
// by the closed-form coefficients a = cot r, b = -tan r of its eta-umbilical
// second fundamental form.
struct BergerData {
  double r;
  double a;
  double b;
};

BergerData make_berger(double r);

// Tangent vectors are given in an orthonormal frame whose third component is
// the eta-value (the Hopf direction coefficient).
double berger_second_fundamental(const BergerData& d, const Vec& x, const Vec& y);
double berger_ricci(const BergerData& d, const Vec& x, const Vec& y);

// beta(T) for unit orthogonal (T, nu) with eta values t, v.
double beta_berger(const BergerData& d, double eta_t, double eta_v);
double beta_berger_pair(const BergerData& d, const Vec& t, const Vec& nu);

// Estimate -2cot^2 r + tan^2 r - 2; an upper bound for beta when tan^2 r >= 2.
double beta_sup_bound(double r);
// Supremum of beta over the admissible disk eta_t^2 + eta_v^2 <= 1.
double beta_sup_exact(double r);

struct BergerSample {
  double max_beta;
  double eta_t_at_max;
  double eta_v_at_max;
};
BergerSample sample_beta_sup(const BergerData& d, int samples, std::uint64_t seed);

struct BergerScanRow {
  double r;
  double tan_r;
  double bound;
  double sampled_sup;
  bool sampled_negative;
};
std::vector<BergerScanRow> berger_scan(double r_min, double r_max, int count, int samples,
                                       std::uint64_t seed);

// Radius where the sup-bound estimate changes sign, found by bisection.
double berger_threshold(double tol = 1e-12);

// Residual of the Ricci closed form against the Gauss equation assembled
// from the umbilical second fundamental form and the ambient curvature.
double berger_gauss_residual(double r);

}  // namespace minlab
