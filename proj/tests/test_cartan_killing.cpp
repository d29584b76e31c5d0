#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "minlab/cartan.hpp"

using namespace minlab;

namespace {

std::mt19937 rng(31);

Vec random_point(int n, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Vec p(n);
  for (int i = 0; i < n; ++i) p[i] = u(rng);
  return p;
}

double g_norm(const Vec& x, const Mat& g) { return std::sqrt(std::max(0.0, x.dot(g * x))); }

}  // namespace

TEST_CASE("decomposition dimensions match the symmetric-pair tables") {
  SphereModel s3(3);
  auto dec = cartan_decompose(s3, Vec::Zero(3));
  CHECK(dec.dim_k() == 3);
  CHECK(dec.dim_n() == 3);

  FubiniStudyModel cp2(2);
  auto dec2 = cartan_decompose(cp2, Vec::Zero(4));
  CHECK(dec2.dim_k() == 4);
  CHECK(dec2.dim_n() == 4);

  // dimensions are point independent
  for (int t = 0; t < 10; ++t) {
    auto da = cartan_decompose(s3, random_point(3, 1.2));
    auto db = cartan_decompose(cp2, random_point(4, 0.9));
    CHECK(da.dim_k() == 3);
    CHECK(db.dim_n() == 4);
  }
}

TEST_CASE("bracket inclusions and orthogonality of the splitting") {
  SphereModel s3(3);
  FubiniStudyModel cp2(2);
  for (const SpaceModel* m : {static_cast<const SpaceModel*>(&s3), static_cast<const SpaceModel*>(&cp2)}) {
    for (int t = 0; t < 3; ++t) {
      Vec p = random_point(m->dim(), 0.8);
      auto dec = cartan_decompose(*m, p);
      auto r = bracket_inclusion_residuals(*m, dec);
      CHECK(r.kk_in_k < 1e-10);
      CHECK(r.kn_in_n < 1e-10);
      CHECK(r.nn_in_k < 1e-10);
      CHECK(r.k_orth_n < 1e-10);
    }
  }
}

TEST_CASE("isotropy fields vanish at the point, tangent fields are parallel there") {
  SphereModel s3(3);
  FubiniStudyModel cp2(2);
  for (const SpaceModel* m : {static_cast<const SpaceModel*>(&s3), static_cast<const SpaceModel*>(&cp2)}) {
    for (int t = 0; t < 10; ++t) {
      Vec p = random_point(m->dim(), 1.0);
      auto dec = cartan_decompose(*m, p);
      Mat g = m->metric(p);
      for (int a = 0; a < dec.dim_k(); ++a) {
        AlgebraElement x{dec.k_basis.col(a)};
        CHECK(g_norm(m->fundamental_field(x, p), g) < 1e-8);
      }
      for (int a = 0; a < dec.dim_n(); ++a) {
        AlgebraElement y{dec.n_basis.col(a)};
        for (int tv = 0; tv < 3; ++tv) {
          Vec v = random_point(m->dim(), 1.0);
          CHECK(g_norm(m->fundamental_field_derivative(y, p, v), g) < 1e-8);
        }
      }
    }
  }
}

TEST_CASE("orthonormal tangent elements give orthonormal field values") {
  SphereModel s3(3);
  FubiniStudyModel cp2(2);
  for (const SpaceModel* m : {static_cast<const SpaceModel*>(&s3), static_cast<const SpaceModel*>(&cp2)}) {
    for (int t = 0; t < 5; ++t) {
      Vec p = random_point(m->dim(), 1.1);
      auto dec = cartan_decompose(*m, p);
      Mat g = m->metric(p);
      int dn = dec.dim_n();
      Mat vals(m->dim(), dn);
      for (int a = 0; a < dn; ++a)
        vals.col(a) = m->fundamental_field(AlgebraElement{dec.n_basis.col(a)}, p);
      Mat gram = vals.transpose() * g * vals;
      CHECK((gram - Mat::Identity(dn, dn)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("derivative of an isotropy field realizes the bracket") {
  // for X in k_p and V in n_p: nab_V X-dagger at p equals the field of [X, V]
  SphereModel s3(3);
  FubiniStudyModel cp2(2);
  for (const SpaceModel* m : {static_cast<const SpaceModel*>(&s3), static_cast<const SpaceModel*>(&cp2)}) {
    Vec p = random_point(m->dim(), 0.9);
    auto dec = cartan_decompose(*m, p);
    const LieAlgebraBasis* alg = m->group();
    for (int a = 0; a < dec.dim_k(); ++a) {
      for (int b = 0; b < dec.dim_n(); ++b) {
        AlgebraElement x{dec.k_basis.col(a)};
        Vec v_alg = dec.n_basis.col(b);
        Vec v_chart = m->fundamental_field(AlgebraElement{v_alg}, p);
        Vec lhs = m->fundamental_field_derivative(x, p, v_chart);
        Vec rhs = m->fundamental_field(AlgebraElement{alg->bracket(x.coeff, v_alg)}, p);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8);
      }
    }
  }
}

TEST_CASE("killing equation holds for the closed-form derivative") {
  SphereModel s3(3);
  FubiniStudyModel cp2(2);
  std::normal_distribution<double> nd;
  for (const SpaceModel* m : {static_cast<const SpaceModel*>(&s3), static_cast<const SpaceModel*>(&cp2)}) {
    int d = m->group()->dim();
    for (int t = 0; t < 20; ++t) {
      Vec p = random_point(m->dim(), 1.0);
      Mat g = m->metric(p);
      Vec coeff(d);
      for (int i = 0; i < d; ++i) coeff[i] = nd(rng);
      AlgebraElement x{coeff};
      Vec v = random_point(m->dim(), 1.0), w = random_point(m->dim(), 1.0);
      double closed = m->fundamental_field_derivative(x, p, v).dot(g * w) +
                      m->fundamental_field_derivative(x, p, w).dot(g * v);
      CHECK(std::abs(closed) < 1e-10);
      // independent finite-difference covariant derivative oracle
      auto field = [&](const Vec& q) { return m->fundamental_field(x, q); };
      double fd = fd_covariant_derivative(*m, field, p, v).dot(g * w) +
                  fd_covariant_derivative(*m, field, p, w).dot(g * v);
      CHECK(std::abs(fd) < 1e-6);
      // the two derivative routes agree
      CHECK((fd_covariant_derivative(*m, field, p, v) -
             m->fundamental_field_derivative(x, p, v))
                .cwiseAbs()
                .maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("field evaluation is linear in the algebra element") {
  FubiniStudyModel cp2(2);
  Vec p = random_point(4, 0.8);
  int d = cp2.group()->dim();
  Vec a = Vec::Random(d), b = Vec::Random(d);
  Vec lhs = cp2.fundamental_field(AlgebraElement{2.0 * a - 3.0 * b}, p);
  Vec rhs = 2.0 * cp2.fundamental_field(AlgebraElement{a}, p) -
            3.0 * cp2.fundamental_field(AlgebraElement{b}, p);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  Vec zero = cp2.fundamental_field(AlgebraElement{Vec::Zero(d)}, p);
  CHECK(zero.norm() == 0.0);
}
