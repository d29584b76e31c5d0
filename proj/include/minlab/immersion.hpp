#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "minlab/common.hpp"
#include "minlab/expression.hpp"
#include "minlab/grid.hpp"
#include "minlab/space_model.hpp"

namespace minlab {

// Closed-form recipe for a parametric hypersurface as read from a key-value
// expression file. Components are either unit-vector coordinates in the flat
// space carrying a sphere model (pushed through its chart) or chart
// coordinates of the ambient model directly.
struct ImmersionRecipe {
  std::string ambient;
  bool ambient_coords = true;
  std::vector<Expression> components;
};

ImmersionRecipe parse_immersion_text(const std::string& text);
ImmersionRecipe parse_immersion_file(const std::string& path);

// Hypersurface given by nodal jets of a parametrization over a periodic grid,
// with positions and derivatives expressed in the ambient model's chart.
// Tagged parametrizations carry exact jets; custom recipes are differentiated
// with 4th-order centered grid stencils.
class ParametricImmersion {
 public:
  enum class Tag { clifford, equator, custom };

  static ParametricImmersion clifford_torus(std::shared_ptr<const SpaceModel> s3, int n1,
                                            int n2);
  static ParametricImmersion equator_circle(std::shared_ptr<const SpaceModel> s2, int n1);
  static ParametricImmersion perturbed_torus(std::shared_ptr<const SpaceModel> s3, int n1,
                                             int n2, double amplitude = 0.05);
  static ParametricImmersion from_recipe(std::shared_ptr<const SpaceModel> ambient,
                                         const ImmersionRecipe& recipe, int n1, int n2 = 1);

  Tag tag() const { return tag_; }
  const PeriodicGrid& grid() const { return grid_; }
  const SpaceModel& ambient() const { return *ambient_; }
  std::shared_ptr<const SpaceModel> ambient_ptr() const { return ambient_; }
  int domain_dim() const { return grid_.dim(); }
  int chart_dim() const { return ambient_->dim(); }

  // Nodal arrays, one row per grid node.
  const Mat& position() const { return position_; }
  const Mat& differential(int axis) const { return diff_[axis]; }
  const Mat& second_derivative(int a, int b) const;
  const Mat& induced_metric() const { return metric_; }
  const Mat& induced_metric_inverse() const { return metric_inv_; }
  const Vec& area_element() const { return area_; }

  Mat metric_at(std::size_t node) const;
  Mat metric_inverse_at(std::size_t node) const;

 private:
  ParametricImmersion(std::shared_ptr<const SpaceModel> ambient, PeriodicGrid grid, Tag tag);

  void finish_geometry();

  std::shared_ptr<const SpaceModel> ambient_;
  PeriodicGrid grid_;
  Tag tag_;
  Mat position_;
  std::vector<Mat> diff_;
  std::vector<Mat> second_;  // d11 for 1d; d11, d12, d22 for 2d
  Mat metric_;
  Mat metric_inv_;
  Vec area_;
};

// Unit normal and second fundamental form data at every node.
struct ExtrinsicData {
  Mat normal;          // node rows, chart components, unit in the chart metric
  Mat a_form;          // node rows, d*d row-major, A(d_a, d_b)
  Mat shape;           // node rows, d*d row-major, g^{-1} A
  Vec a_norm2;         // tr(S^2)
  Vec mean_curvature;  // tr(S)

  Mat a_at(std::size_t node, int d) const;
  Mat shape_at(std::size_t node, int d) const;
};

ExtrinsicData extrinsic_data(const ParametricImmersion& imm);

struct MinimalityReport {
  double max_mean_curvature = 0.0;
  std::size_t node = 0;
};

MinimalityReport verify_minimal(const ParametricImmersion& imm, const ExtrinsicData& ext);

// Nodal Christoffel symbols of the induced metric from 4th-order stencils,
// flattened as ((c*d)+a)*d+b.
Mat induced_christoffels(const ParametricImmersion& imm);

// Pointwise defect of the Gauss equation relating intrinsic curvature of the
// induced metric to ambient curvature and A-terms; 2d domains only.
Vec gauss_residual_field(const ParametricImmersion& imm, const ExtrinsicData& ext);

// Finite-difference check of the Codazzi identity on coordinate-constant
// arguments. Flat ambient spaces report not-applicable.
class CodazziEvaluator {
 public:
  CodazziEvaluator(const ParametricImmersion& imm, const ExtrinsicData& ext);

  std::optional<double> residual(std::size_t node, const Vec& x, const Vec& y,
                                 const Vec& z) const;

 private:
  ParametricImmersion imm_;
  ExtrinsicData ext_;
  bool applicable_;
  Mat gamma_;
  std::vector<Mat> da_;
};

// Round 2-sphere presented in two stereographic parameter charts glued by a
// quintic partition of unity in the shared height coordinate. Covers both the
// totally geodesic equator inside the 3-sphere chart and round spheres of any
// radius in flat 3-space.
class TwoChartSphereImmersion {
 public:
  static TwoChartSphereImmersion equator_in_s3(std::shared_ptr<const SpaceModel> s3);
  static TwoChartSphereImmersion round_sphere(std::shared_ptr<const SpaceModel> euclid3,
                                              double radius);

  const SpaceModel& ambient() const { return *ambient_; }
  std::shared_ptr<const SpaceModel> ambient_ptr() const { return ambient_; }
  double radius() const { return radius_; }
  // Half width of the partition-of-unity blend band in the height coordinate.
  double band() const { return band_; }
  // Parameter radius beyond which the chart's weight vanishes identically.
  double support_radius() const;

  Vec position(int chart, const Vec& y) const;
  Mat differential(int chart, const Vec& y) const;
  Mat induced_metric(int chart, const Vec& y) const;
  Vec normal(int chart, const Vec& y) const;
  Mat second_fundamental(int chart, const Vec& y) const;
  double a_norm2(int chart, const Vec& y) const;
  double potential(int chart, const Vec& y) const;
  double height(int chart, const Vec& y) const;
  double weight(int chart, const Vec& y) const;
  Vec weight_gradient(int chart, const Vec& y) const;

  static Vec transition(const Vec& y);
  static Mat transition_differential(const Vec& y);

 private:
  enum class Kind { equator, round };

  TwoChartSphereImmersion(std::shared_ptr<const SpaceModel> ambient, Kind kind,
                          double radius);

  std::shared_ptr<const SpaceModel> ambient_;
  Kind kind_;
  double radius_;
  double band_ = 0.6;
};

}  // namespace minlab
