#pragma once

#include <memory>
#include <string>
#include <vector>

#include "minlab/common.hpp"
#include "minlab/lie_algebra.hpp"

namespace minlab {

// Element of a model's isometry algebra: coefficients over the algebra basis.
struct AlgebraElement {
  Vec coeff;
};

// Ambient space presented in a single coordinate chart. All tensor
// evaluators take chart coordinates and return chart components.
class SpaceModel {
 public:
  virtual ~SpaceModel() = default;

  virtual std::string kind() const = 0;
  virtual int dim() const = 0;

  virtual Mat metric(const Vec& p) const = 0;
  virtual std::vector<Mat> christoffel(const Vec& p) const = 0;  // gamma[k](i,j)
  // R(X,Y)Z with the sign convention R(X,Y)Z = nab_X nab_Y Z - nab_Y nab_X Z
  // - nab_[X,Y] Z, closed form.
  virtual Vec curvature(const Vec& p, const Vec& x, const Vec& y, const Vec& z) const = 0;
  virtual Mat ricci(const Vec& p) const;
  virtual double einstein_constant() const = 0;
  virtual double scalar_curvature(const Vec& p) const;

  // Throws std::domain_error when metric eigenvalues leave [1e-6, 1e6].
  void check_chart(const Vec& p) const;

  // Isometry-algebra data; null for spaces handled without group structure.
  virtual const LieAlgebraBasis* group() const { return nullptr; }
  // Scale applied to -B(.,.) so that fundamental fields of orthonormal
  // algebra elements are unit vectors on the model.
  virtual double gram_scale() const { return 1.0; }
  Mat scaled_gram() const;
  // Chart matrix of the involutive algebra automorphism attached to p.
  virtual Mat involution_on_algebra(const Vec& p) const;
  // Fundamental vector field of X at p, chart components.
  virtual Vec fundamental_field(const AlgebraElement& x, const Vec& p) const;
  // Covariant derivative nab_v (X-dagger) at p, chart components, closed form.
  virtual Vec fundamental_field_derivative(const AlgebraElement& x, const Vec& p,
                                           const Vec& v) const;

  // Isometric embedding into flat space when one is part of the model.
  virtual int embed_dim() const { return 0; }
  virtual Vec embed(const Vec& p) const;
  virtual Mat embed_differential(const Vec& p) const;

  Rank4 riemann(const Vec& p) const;  // lowered R_{ijkl} = g(R(ei,ej)ek, el)
  double sectional(const Vec& p, const Vec& x, const Vec& y) const;
};

// Round unit sphere S^n in the stereographic chart from the south pole;
// chart origin is the north pole e_{n+1}.
class SphereModel : public SpaceModel {
 public:
  explicit SphereModel(int n);

  std::string kind() const override { return "s" + std::to_string(n_); }
  int dim() const override { return n_; }
  Mat metric(const Vec& p) const override;
  std::vector<Mat> christoffel(const Vec& p) const override;
  Vec curvature(const Vec& p, const Vec& x, const Vec& y, const Vec& z) const override;
  Mat ricci(const Vec& p) const override;
  double einstein_constant() const override { return n_ - 1.0; }

  const LieAlgebraBasis* group() const override { return &alg_; }
  double gram_scale() const override { return 1.0 / (2.0 * (n_ - 1.0)); }
  Mat involution_on_algebra(const Vec& p) const override;
  Vec fundamental_field(const AlgebraElement& x, const Vec& p) const override;
  Vec fundamental_field_derivative(const AlgebraElement& x, const Vec& p,
                                   const Vec& v) const override;

  int embed_dim() const override { return n_ + 1; }
  Vec embed(const Vec& p) const override;
  Mat embed_differential(const Vec& p) const override;

  // Differential of the chart map q -> q_{1:n}/(1+q_{n+1}) at a sphere point.
  Mat chart_differential(const Vec& q) const;
  // Ambient value of the fundamental field at sphere point q.
  Vec fundamental_field_ambient(const AlgebraElement& x, const Vec& q) const;

 private:
  int n_;
  LieAlgebraBasis alg_;
};

// Complex projective space with holomorphic sectional curvature 4, affine
// chart around [1:0:...:0]. Real chart coordinates interleave re/im parts.
class FubiniStudyModel : public SpaceModel {
 public:
  explicit FubiniStudyModel(int m);

  std::string kind() const override { return "cp" + std::to_string(m_); }
  int dim() const override { return 2 * m_; }
  Mat metric(const Vec& p) const override;
  std::vector<Mat> christoffel(const Vec& p) const override;
  Vec curvature(const Vec& p, const Vec& x, const Vec& y, const Vec& z) const override;
  Mat ricci(const Vec& p) const override;
  double einstein_constant() const override { return 2.0 * (m_ + 1.0); }

  const LieAlgebraBasis* group() const override { return &alg_; }
  double gram_scale() const override { return 1.0 / (4.0 * (m_ + 1.0)); }
  Mat involution_on_algebra(const Vec& p) const override;
  Vec fundamental_field(const AlgebraElement& x, const Vec& p) const override;
  Vec fundamental_field_derivative(const AlgebraElement& x, const Vec& p,
                                   const Vec& v) const override;

  // Chart matrix of the complex structure.
  Mat complex_structure() const;

  static CVec to_complex(const Vec& p);
  static Vec to_real(const CVec& z);

 private:
  CVec holomorphic_gamma(const CVec& z, const CVec& u, const CVec& v) const;

  int m_;
  LieAlgebraBasis alg_;
};

class EuclideanModel : public SpaceModel {
 public:
  explicit EuclideanModel(int n) : n_(n) {
    if (n < 1) throw input_error("euclidean dimension must be >= 1");
  }
  std::string kind() const override { return "euclid:" + std::to_string(n_); }
  int dim() const override { return n_; }
  Mat metric(const Vec&) const override { return Mat::Identity(n_, n_); }
  std::vector<Mat> christoffel(const Vec&) const override {
    return std::vector<Mat>(n_, Mat::Zero(n_, n_));
  }
  Vec curvature(const Vec&, const Vec&, const Vec&, const Vec&) const override {
    return Vec::Zero(n_);
  }
  Mat ricci(const Vec&) const override { return Mat::Zero(n_, n_); }
  double einstein_constant() const override { return 0.0; }
  int embed_dim() const override { return n_; }
  Vec embed(const Vec& p) const override { return p; }
  Mat embed_differential(const Vec&) const override { return Mat::Identity(n_, n_); }

 private:
  int n_;
};

// Finite-difference fallbacks used as oracles against the closed forms.
std::vector<Mat> fd_christoffel(const SpaceModel& model, const Vec& p, double h = 1e-5,
                                bool richardson = false);
Rank4 fd_riemann(const SpaceModel& model, const Vec& p, double h = 1e-4);

// Parse "s3", "cp2", "euclid:4" into a model instance.
std::unique_ptr<SpaceModel> make_model(const std::string& name);

}  // namespace minlab
