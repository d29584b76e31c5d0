#include "minlab/berger.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "minlab/space_model.hpp"

namespace minlab {

BergerData make_berger(double r) {
  if (!(r > 0.0) || !(r < kPi / 2.0))
    throw input_error("berger radius must lie in (0, pi/2)");
  return BergerData{r, 1.0 / std::tan(r), -std::tan(r)};
}

double berger_second_fundamental(const BergerData& d, const Vec& x, const Vec& y) {
  if (x.size() != 3 || y.size() != 3) throw input_error("berger vectors are 3-dimensional");
  return d.a * x.dot(y) + d.b * x[2] * y[2];
}

double berger_ricci(const BergerData& d, const Vec& x, const Vec& y) {
  if (x.size() != 3 || y.size() != 3) throw input_error("berger vectors are 3-dimensional");
  return (2.0 * d.a * d.a + 4.0) * x.dot(y) - 4.0 * x[2] * y[2];
}

double beta_berger(const BergerData& d, double eta_t, double eta_v) {
  if (std::abs(eta_t) > 1.0 + 1e-12 || std::abs(eta_v) > 1.0 + 1e-12)
    throw input_error("eta values must lie in [-1, 1]");
  double t2 = eta_t * eta_t, v2 = eta_v * eta_v;
  double b2 = d.b * d.b;
  return -2.0 * d.a * d.a - 3.0 * (1.0 - v2) - b2 * t2 * v2 + (b2 - 2.0) * t2;
}

double beta_berger_pair(const BergerData& d, const Vec& t, const Vec& nu) {
  if (t.size() != 3 || nu.size() != 3) throw input_error("berger vectors are 3-dimensional");
  if (std::abs(t.norm() - 1.0) > 1e-8 || std::abs(nu.norm() - 1.0) > 1e-8 ||
      std::abs(t.dot(nu)) > 1e-8)
    throw input_error("beta requires a unit orthogonal pair");
  return beta_berger(d, t[2], nu[2]);
}

double beta_sup_bound(double r) {
  double a = 1.0 / std::tan(r), b = std::tan(r);
  return -2.0 * a * a + b * b - 2.0;
}

double beta_sup_exact(double r) {
  // beta is affine in t^2 at fixed v^2; the maximum over the disk sits at
  // t = 0, v = 1 or at the boundary corner v = 0, t = 1.
  double a2 = 1.0 / (std::tan(r) * std::tan(r));
  double b2 = std::tan(r) * std::tan(r);
  return std::max(-2.0 * a2, -2.0 * a2 + b2 - 5.0);
}

BergerSample sample_beta_sup(const BergerData& d, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  BergerSample best{-std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (int s = 0; s < samples; ++s) {
    Mat a(3, 2);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) a(i, j) = nd(rng);
    Eigen::HouseholderQR<Mat> qr(a);
    Mat q = qr.householderQ() * Mat::Identity(3, 2);
    Vec t = q.col(0), nu = q.col(1);
    double beta = beta_berger_pair(d, t, nu);
    if (beta > best.max_beta) best = BergerSample{beta, t[2], nu[2]};
  }
  return best;
}

std::vector<BergerScanRow> berger_scan(double r_min, double r_max, int count, int samples,
                                       std::uint64_t seed) {
  if (!(r_min > 0.0) || !(r_max < kPi / 2.0) || !(r_min < r_max))
    throw input_error("berger scan range must satisfy 0 < r_min < r_max < pi/2");
  if (count < 2) throw input_error("berger scan needs at least 2 radii");
  std::vector<BergerScanRow> rows;
  rows.reserve(count);
  for (int i = 0; i < count; ++i) {
    double r = r_min + (r_max - r_min) * i / (count - 1.0);
    BergerData d = make_berger(r);
    BergerSample s = sample_beta_sup(d, samples, seed + static_cast<std::uint64_t>(i));
    rows.push_back({r, std::tan(r), beta_sup_bound(r), s.max_beta, s.max_beta < 0.0});
  }
  return rows;
}

double berger_threshold(double tol) {
  double lo = 0.9, hi = 1.5;  // bound is negative at lo, positive at hi
  if (!(beta_sup_bound(lo) < 0.0) || !(beta_sup_bound(hi) > 0.0))
    throw numeric_error("threshold bracket does not straddle a sign change");
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (beta_sup_bound(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double berger_gauss_residual(double r) {
  BergerData d = make_berger(r);
  FubiniStudyModel cp2(2);
  Vec origin = Vec::Zero(4);
  // orthonormal tangent frame of the hypersphere inside T_0 CP^2 = C^2:
  // normal (1,0), Hopf direction -J(1,0), and a complex line orthogonal to both
  Vec nu_s(4), xi(4), e2(4), e3(4);
  nu_s << 1, 0, 0, 0;
  xi << 0, -1, 0, 0;  // -J nu_s, eta(xi) = 1
  e2 << 0, 0, 1, 0;
  e3 << 0, 0, 0, 1;
  std::vector<Vec> frame = {xi, e2, e3};
  auto eta = [&](int i) { return i == 0 ? 1.0 : 0.0; };
  auto b_form = [&](int i, int j) {
    double ip = frame[i].dot(frame[j]);
    return d.a * ip + d.b * eta(i) * eta(j);
  };
  double h = b_form(0, 0) + b_form(1, 1) + b_form(2, 2);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double amb = 0.0;
      for (int mu = 0; mu < 3; ++mu) {
        Vec rv = cp2.curvature(origin, frame[i], frame[mu], frame[mu]);
        amb += rv.dot(frame[j]);
      }
      double gauss = amb + h * b_form(i, j);
      for (int mu = 0; mu < 3; ++mu) gauss -= b_form(i, mu) * b_form(mu, j);
      double closed = (2.0 * d.a * d.a + 4.0) * frame[i].dot(frame[j]) - 4.0 * eta(i) * eta(j);
      worst = std::max(worst, std::abs(gauss - closed));
    }
  }
  return worst;
}

}  // namespace minlab
