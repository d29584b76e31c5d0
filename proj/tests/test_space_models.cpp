#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "minlab/space_model.hpp"

using namespace minlab;

namespace {

std::mt19937 rng(2026);

Vec random_point(int n, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Vec p(n);
  for (int i = 0; i < n; ++i) p[i] = u(rng);
  return p;
}

double max_rank4_diff(const Rank4& a, const Rank4& b) {
  double worst = 0.0;
  int n = a.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          worst = std::max(worst, std::abs(a(i, j, k, l) - b(i, j, k, l)));
  return worst;
}

}  // namespace

TEST_CASE("sphere chart metric at the origin is 4I") {
  SphereModel s2(2);
  Mat g = s2.metric(Vec::Zero(2));
  CHECK((g - 4.0 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("euclidean model is flat with identity metric") {
  EuclideanModel e(4);
  Vec p = random_point(4, 2.0);
  CHECK((e.metric(p) - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(e.curvature(p, random_point(4, 1), random_point(4, 1), random_point(4, 1)).norm() == 0.0);
}

TEST_CASE("sphere sectional curvature is 1 on random planes") {
  SphereModel s3(3);
  for (int t = 0; t < 10; ++t) {
    Vec p = random_point(3, 1.4);
    CHECK(s3.sectional(p, random_point(3, 1), random_point(3, 1)) ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("closed-form christoffels match finite differences of the metric") {
  SphereModel s3(3);
  FubiniStudyModel cp2(2);
  for (const SpaceModel* m : {static_cast<const SpaceModel*>(&s3), static_cast<const SpaceModel*>(&cp2)}) {
    Vec p = random_point(m->dim(), 0.8);
    auto closed = m->christoffel(p);
    auto fd = fd_christoffel(*m, p, 1e-5, true);
    double worst = 0.0;
    for (int k = 0; k < m->dim(); ++k)
      worst = std::max(worst, (closed[k] - fd[k]).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("finite-difference christoffel error decays at second order") {
  FubiniStudyModel cp2(2);
  Vec p = random_point(4, 0.7);
  auto closed = cp2.christoffel(p);
  auto err = [&](double h) {
    auto fd = fd_christoffel(cp2, p, h, false);
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) worst = std::max(worst, (closed[k] - fd[k]).cwiseAbs().maxCoeff());
    return worst;
  };
  double e1 = err(1e-3), e2 = err(5e-4);
  CHECK(e1 / e2 > std::pow(2.0, 1.8));
}

TEST_CASE("closed-form curvature matches finite-difference curvature") {
  SphereModel s3(3);
  FubiniStudyModel cp2(2);
  for (const SpaceModel* m : {static_cast<const SpaceModel*>(&s3), static_cast<const SpaceModel*>(&cp2)}) {
    Vec p = random_point(m->dim(), 0.6);
    CHECK(max_rank4_diff(m->riemann(p), fd_riemann(*m, p, 1e-4)) < 1e-6);
  }
}

TEST_CASE("first Bianchi identity") {
  FubiniStudyModel cp2(2);
  for (int t = 0; t < 10; ++t) {
    Vec p = random_point(4, 1.0);
    Vec x = random_point(4, 1), y = random_point(4, 1), z = random_point(4, 1);
    Vec r = cp2.curvature(p, x, y, z) + cp2.curvature(p, y, z, x) + cp2.curvature(p, z, x, y);
    CHECK(r.cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("projective line has constant curvature 4") {
  FubiniStudyModel cp1(1);
  for (int t = 0; t < 5; ++t) {
    Vec p = random_point(2, 1.2);
    CHECK(cp1.sectional(p, Vec::Unit(2, 0), Vec::Unit(2, 1)) ==
          doctest::Approx(4.0).epsilon(1e-10));
  }
}

TEST_CASE("holomorphic planes have curvature 4, totally real planes 1") {
  FubiniStudyModel cp2(2);
  Mat j = cp2.complex_structure();
  Vec p = random_point(4, 0.9);
  Vec x = random_point(4, 1.0);
  CHECK(cp2.sectional(p, x, j * x) == doctest::Approx(4.0).epsilon(1e-10));
  Vec origin = Vec::Zero(4);
  CHECK(cp2.sectional(origin, Vec::Unit(4, 0), Vec::Unit(4, 2)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("metric is hermitian-compatible with the complex structure") {
  FubiniStudyModel cp2(2);
  Mat j = cp2.complex_structure();
  Vec p = random_point(4, 1.1);
  Mat g = cp2.metric(p);
  CHECK((j.transpose() * g * j - g).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("einstein constants via trace contraction") {
  SphereModel s3(3);
  Vec p = random_point(3, 1.0);
  Mat ric_generic = s3.SpaceModel::ricci(p);
  CHECK((ric_generic - 2.0 * s3.metric(p)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(s3.scalar_curvature(p) == doctest::Approx(6.0).epsilon(1e-10));

  FubiniStudyModel cp2(2);
  Vec q = random_point(4, 0.8);
  Mat ric = cp2.SpaceModel::ricci(q);
  CHECK((ric - 6.0 * cp2.metric(q)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(cp2.scalar_curvature(q) == doctest::Approx(24.0).epsilon(1e-10));
}

TEST_CASE("chart boundary policy raises domain_error") {
  SphereModel s2(2);
  Vec far = Vec::Constant(2, 40.0);
  CHECK_THROWS_AS(s2.metric(far), std::domain_error);
  FubiniStudyModel cp2(2);
  Vec farz = Vec::Constant(4, 30.0);
  CHECK_THROWS_AS(cp2.metric(farz), std::domain_error);
  CHECK_NOTHROW(s2.check_chart(Vec::Zero(2)));
}

TEST_CASE("involutions square to the identity and balance dimensions") {
  SphereModel s3(3);
  FubiniStudyModel cp2(2);
  for (const SpaceModel* m : {static_cast<const SpaceModel*>(&s3), static_cast<const SpaceModel*>(&cp2)}) {
    Vec p = random_point(m->dim(), 0.9);
    Mat sig = m->involution_on_algebra(p);
    int d = m->group()->dim();
    CHECK((sig * sig - Mat::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(sig.trace()) < 1e-10);  // equal +1/-1 eigenspace split
    Mat g = m->scaled_gram();
    CHECK((sig.transpose() * g * sig - g).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("embedding and chart differential are mutually inverse") {
  SphereModel s3(3);
  Vec p = random_point(3, 1.3);
  Vec q = s3.embed(p);
  CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-14));
  Mat comp = s3.chart_differential(q) * s3.embed_differential(p);
  CHECK((comp - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  // pullback of the round metric equals the chart metric
  Mat de = s3.embed_differential(p);
  CHECK((de.transpose() * de - s3.metric(p)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("model string parsing") {
  CHECK(make_model("s3")->dim() == 3);
  CHECK(make_model("cp2")->dim() == 4);
  CHECK(make_model("euclid:4")->dim() == 4);
  CHECK_THROWS_AS(make_model("torus"), input_error);
  CHECK_THROWS_AS(make_model("euclid:x"), input_error);
  CHECK_THROWS_AS(make_model("s1"), input_error);
}
