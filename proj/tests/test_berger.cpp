#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "minlab/berger.hpp"
#include "minlab/space_model.hpp"

using namespace minlab;

TEST_CASE("coefficients satisfy ab = -1 and the radius is validated") {
  for (double r : {0.3, 0.8, 1.2}) {
    BergerData d = make_berger(r);
    CHECK(d.a * d.b == doctest::Approx(-1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(make_berger(0.0), input_error);
  CHECK_THROWS_AS(make_berger(kPi / 2.0), input_error);
}

TEST_CASE("umbilical second fundamental form on the distinguished frame") {
  BergerData d = make_berger(0.7);
  Vec xi(3), h1(3), h2(3);
  xi << 0, 0, 1;
  h1 << 1, 0, 0;
  h2 << 0, 1, 0;
  CHECK(berger_second_fundamental(d, xi, xi) == doctest::Approx(d.a + d.b).epsilon(1e-14));
  CHECK(berger_second_fundamental(d, h1, h1) == doctest::Approx(d.a).epsilon(1e-14));
  CHECK(berger_second_fundamental(d, h1, h2) == doctest::Approx(0.0));
  CHECK(berger_second_fundamental(d, h1, xi) == doctest::Approx(0.0));
}

TEST_CASE("ricci closed form: values and positivity") {
  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  for (double r : {0.3, 0.7, 1.2}) {
    BergerData d = make_berger(r);
    Vec xi(3), h1(3);
    xi << 0, 0, 1;
    h1 << 1, 0, 0;
    CHECK(berger_ricci(d, xi, xi) == doctest::Approx(2 * d.a * d.a).epsilon(1e-13));
    CHECK(berger_ricci(d, h1, h1) == doctest::Approx(2 * d.a * d.a + 4).epsilon(1e-13));
    for (int t = 0; t < 100; ++t) {
      Vec x(3);
      for (int i = 0; i < 3; ++i) x[i] = nd(rng);
      x.normalize();
      CHECK(berger_ricci(d, x, x) > 0.0);
    }
  }
}

TEST_CASE("ricci closed form agrees with the Gauss equation") {
  for (double r : {0.4, 0.9, 1.3}) CHECK(berger_gauss_residual(r) < 1e-10);
}

TEST_CASE("umbilical form reproduced extrinsically on the chart hypersphere |z| = tan r") {
  // parametrize the geodesic hypersphere near z0 = (tan r, 0) and compare the
  // chart-computed second fundamental form against a<X,Y> + b eta(X)eta(Y)
  FubiniStudyModel cp2(2);
  for (double r : {0.5, 0.9, 1.1}) {
    double c = std::tan(r);
    double tt = 1.0 + c * c;
    BergerData d = make_berger(r);
    Vec z0(4);
    z0 << c, 0, 0, 0;
    Mat g = cp2.metric(z0);
    // tangent frame from the unit-sphere parametrization w -> c*(sqrt(1-|w|^2), w)
    std::vector<Vec> tan_frame;
    for (int k = 1; k < 4; ++k) tan_frame.push_back(c * Vec::Unit(4, k));
    // second derivatives of the parametrization at w = 0
    auto second_deriv = [&](int i, int j) -> Vec {
      if (i == j) return -c * Vec::Unit(4, 0);
      return Vec::Zero(4);
    };
    Vec nu = -tt * Vec::Unit(4, 0);  // inward unit normal
    CHECK(nu.dot(g * nu) == doctest::Approx(1.0).epsilon(1e-12));
    for (const Vec& tv : tan_frame) CHECK(std::abs(nu.dot(g * tv)) < 1e-12);
    Mat j = cp2.complex_structure();
    Vec xi = -j * nu;
    auto gamma = cp2.christoffel(z0);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int jdx = 0; jdx < 3; ++jdx) {
        Vec acc = second_deriv(i, jdx);
        for (int k = 0; k < 4; ++k) acc[k] += tan_frame[i].dot(gamma[k] * tan_frame[jdx]);
        double a_ij = acc.dot(g * nu);
        double eta_i = tan_frame[i].dot(g * xi), eta_j = tan_frame[jdx].dot(g * xi);
        double expected = d.a * tan_frame[i].dot(g * tan_frame[jdx]) + d.b * eta_i * eta_j;
        worst = std::max(worst, std::abs(a_ij - expected));
      }
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("beta closed form: pinned values and input validation") {
  BergerData d1 = make_berger(kPi / 4.0);  // tan r = 1
  CHECK(beta_sup_bound(kPi / 4.0) == doctest::Approx(-3.0).epsilon(1e-13));
  for (double v : {0.0, 0.5, 1.0}) {
    CHECK(beta_berger(d1, 0.0, v) ==
          doctest::Approx(-2 * d1.a * d1.a - 3 * (1 - v * v)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(beta_berger(d1, 1.5, 0.0), input_error);
  Vec t(3), nu(3);
  t << 1, 0, 0;
  nu << 1, 0, 0;  // not orthogonal
  CHECK_THROWS_AS(beta_berger_pair(d1, t, nu), input_error);
}

TEST_CASE("threshold bisection hits the closed-form root") {
  double r_star = berger_threshold();
  double expected = std::sqrt(1.0 + std::sqrt(3.0));
  CHECK(std::tan(r_star) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(std::tan(r_star) > 1.64);
  CHECK(std::tan(r_star) < 1.67);
}

TEST_CASE("sampled beta respects the exact sup everywhere and the estimate where valid") {
  for (int i = 0; i <= 12; ++i) {
    double r = 0.2 + i * (1.35 - 0.2) / 12.0;
    BergerData d = make_berger(r);
    BergerSample s = sample_beta_sup(d, 4000, 99 + i);
    CHECK(s.max_beta <= beta_sup_exact(r) + 1e-9);
    if (std::tan(r) * std::tan(r) >= 2.0) CHECK(s.max_beta <= beta_sup_bound(r) + 1e-9);
    // the sampler actually explores the admissible disk
    CHECK(s.max_beta > beta_sup_exact(r) - 0.25);
    if (std::tan(r) <= 1.6) CHECK(s.max_beta < 0.0);
  }
}

TEST_CASE("scan rows are deterministic for a fixed seed") {
  auto rows1 = berger_scan(0.5, 1.2, 8, 500, 7);
  auto rows2 = berger_scan(0.5, 1.2, 8, 500, 7);
  REQUIRE(rows1.size() == 8);
  for (std::size_t i = 0; i < rows1.size(); ++i) {
    CHECK(rows1[i].sampled_sup == rows2[i].sampled_sup);
    CHECK(rows1[i].bound == doctest::Approx(beta_sup_bound(rows1[i].r)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(berger_scan(1.2, 0.5, 8, 100, 1), input_error);
}
