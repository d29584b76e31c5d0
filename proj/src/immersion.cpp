#include "minlab/immersion.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

namespace minlab {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Jets of the stereographic chart map q -> q_{1:m}/(1+q_{m+1}) at a point of
// the unit sphere; w = 1 + last coordinate.
Mat chart_jacobian(const Vec& q) {
  const int m = static_cast<int>(q.size()) - 1;
  const double w = 1.0 + q[m];
  Mat j(m, m + 1);
  j.setZero();
  for (int i = 0; i < m; ++i) {
    j(i, i) = 1.0 / w;
    j(i, m) = -q[i] / (w * w);
  }
  return j;
}

Vec chart_point(const Vec& q) {
  const int m = static_cast<int>(q.size()) - 1;
  const double w = 1.0 + q[m];
  if (w < 1e-8) throw geometry_error("immersion hits the chart pole");
  return q.head(m) / w;
}

// Second-derivative contribution H(u,v) of the chart map.
Vec chart_hessian_apply(const Vec& q, const Vec& u, const Vec& v) {
  const int m = static_cast<int>(q.size()) - 1;
  const double w = 1.0 + q[m];
  const double w2 = w * w;
  const double w3 = w2 * w;
  Vec out(m);
  for (int i = 0; i < m; ++i)
    out[i] = -(u[i] * v[m] + u[m] * v[i]) / w2 + 2.0 * q[i] * u[m] * v[m] / w3;
  return out;
}

struct AmbientJet {
  Vec q;
  std::vector<Vec> dq;
  std::vector<Vec> ddq;  // (0,0) for 1d; (0,0),(0,1),(1,1) for 2d
};

struct ChartJet {
  Vec x;
  std::vector<Vec> dx;
  std::vector<Vec> ddx;
};

ChartJet push_through_chart(const AmbientJet& a) {
  ChartJet c;
  c.x = chart_point(a.q);
  Mat j = chart_jacobian(a.q);
  for (const Vec& v : a.dq) c.dx.push_back(j * v);
  const int d = static_cast<int>(a.dq.size());
  auto pair_index = [d](int p, int q2) { return d == 1 ? 0 : p + q2; };
  for (int p = 0; p < d; ++p)
    for (int q2 = p; q2 < d; ++q2) {
      const Vec& dd = a.ddq[pair_index(p, q2)];
      c.ddx.push_back(j * dd + chart_hessian_apply(a.q, a.dq[p], a.dq[q2]));
    }
  return c;
}

bool flat_ambient(const SpaceModel& model) { return model.kind().rfind("euclid", 0) == 0; }

}  // namespace

ImmersionRecipe parse_immersion_text(const std::string& text) {
  ImmersionRecipe recipe;
  bool coords_seen = false;
  std::vector<std::pair<int, Expression>> comps;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw input_error("immersion file: line " + std::to_string(line_no) +
                        " is not a key = value pair");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "ambient") {
      recipe.ambient = value;
    } else if (key == "coords") {
      if (value == "ambient")
        recipe.ambient_coords = true;
      else if (value == "chart")
        recipe.ambient_coords = false;
      else
        throw input_error("immersion file: coords must be 'ambient' or 'chart'");
      coords_seen = true;
    } else if (key.size() >= 2 && key[0] == 'f') {
      int idx = 0;
      try {
        idx = std::stoi(key.substr(1));
      } catch (const std::exception&) {
        throw input_error("immersion file: unknown key '" + key + "'");
      }
      if (idx < 1) throw input_error("immersion file: component index must start at 1");
      comps.emplace_back(idx, Expression::parse(value));
    } else {
      throw input_error("immersion file: unknown key '" + key + "'");
    }
  }
  if (recipe.ambient.empty()) throw input_error("immersion file: missing 'ambient' key");
  if (comps.empty()) throw input_error("immersion file: no components given");
  int max_idx = 0;
  for (const auto& [idx, e] : comps) max_idx = std::max(max_idx, idx);
  recipe.components.resize(max_idx);
  std::vector<bool> seen(max_idx, false);
  for (auto& [idx, e] : comps) {
    if (seen[idx - 1])
      throw input_error("immersion file: duplicate component f" + std::to_string(idx));
    seen[idx - 1] = true;
    recipe.components[idx - 1] = e;
  }
  for (int i = 0; i < max_idx; ++i)
    if (!seen[i]) throw input_error("immersion file: missing component f" + std::to_string(i + 1));
  (void)coords_seen;
  return recipe;
}

ImmersionRecipe parse_immersion_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("immersion file not found: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_immersion_text(buf.str());
}

ParametricImmersion::ParametricImmersion(std::shared_ptr<const SpaceModel> ambient,
                                         PeriodicGrid grid, Tag tag)
    : ambient_(std::move(ambient)), grid_(grid), tag_(tag) {}

const Mat& ParametricImmersion::second_derivative(int a, int b) const {
  const int d = domain_dim();
  if (a < 0 || b < 0 || a >= d || b >= d) throw input_error("second_derivative: bad axis");
  if (d == 1) return second_[0];
  return second_[a + b];
}

Mat ParametricImmersion::metric_at(std::size_t node) const {
  const int d = domain_dim();
  Mat g(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) g(a, b) = metric_(node, a * d + b);
  return g;
}

Mat ParametricImmersion::metric_inverse_at(std::size_t node) const {
  const int d = domain_dim();
  Mat g(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) g(a, b) = metric_inv_(node, a * d + b);
  return g;
}

void ParametricImmersion::finish_geometry() {
  const int d = domain_dim();
  const std::size_t n_nodes = grid_.size();
  metric_.resize(n_nodes, d * d);
  metric_inv_.resize(n_nodes, d * d);
  area_.resize(n_nodes);
  for (std::size_t k = 0; k < n_nodes; ++k) {
    Vec x = position_.row(k);
    Mat big_g = ambient_->metric(x);
    Mat t(chart_dim(), d);
    for (int a = 0; a < d; ++a) t.col(a) = diff_[a].row(k);
    Mat g = t.transpose() * big_g * t;
    double det = d == 1 ? g(0, 0) : g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    if (!(det > 1e-14) || !(g(0, 0) > 0.0))
      throw geometry_error("degenerate induced metric at node " + std::to_string(k));
    Mat ginv(d, d);
    if (d == 1) {
      ginv(0, 0) = 1.0 / g(0, 0);
    } else {
      ginv(0, 0) = g(1, 1) / det;
      ginv(1, 1) = g(0, 0) / det;
      ginv(0, 1) = -g(0, 1) / det;
      ginv(1, 0) = -g(1, 0) / det;
    }
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        metric_(k, a * d + b) = g(a, b);
        metric_inv_(k, a * d + b) = ginv(a, b);
      }
    area_[k] = std::sqrt(det);
  }
}

ParametricImmersion ParametricImmersion::clifford_torus(
    std::shared_ptr<const SpaceModel> s3, int n1, int n2) {
  if (!s3 || s3->kind() != "s3")
    throw input_error("clifford_torus requires the s3 model");
  ParametricImmersion imm(std::move(s3), PeriodicGrid(2, n1, n2), Tag::clifford);
  const std::size_t n_nodes = imm.grid_.size();
  const double c = 1.0 / std::sqrt(2.0);
  imm.position_.resize(n_nodes, 3);
  imm.diff_.assign(2, Mat(n_nodes, 3));
  imm.second_.assign(3, Mat(n_nodes, 3));
  for (std::size_t k = 0; k < n_nodes; ++k) {
    const double u1 = imm.grid_.u1(k), u2 = imm.grid_.u2(k);
    const double c1 = std::cos(u1), s1 = std::sin(u1);
    const double c2 = std::cos(u2), s2 = std::sin(u2);
    AmbientJet jet;
    jet.q = c * Vec{{c1, s1, c2, s2}};
    jet.dq = {c * Vec{{-s1, c1, 0.0, 0.0}}, c * Vec{{0.0, 0.0, -s2, c2}}};
    jet.ddq = {c * Vec{{-c1, -s1, 0.0, 0.0}}, Vec::Zero(4), c * Vec{{0.0, 0.0, -c2, -s2}}};
    ChartJet cj = push_through_chart(jet);
    imm.position_.row(k) = cj.x;
    for (int a = 0; a < 2; ++a) imm.diff_[a].row(k) = cj.dx[a];
    for (int s = 0; s < 3; ++s) imm.second_[s].row(k) = cj.ddx[s];
  }
  imm.finish_geometry();
  return imm;
}

ParametricImmersion ParametricImmersion::equator_circle(
    std::shared_ptr<const SpaceModel> s2, int n1) {
  if (!s2 || s2->kind() != "s2")
    throw input_error("equator_circle requires the s2 model");
  ParametricImmersion imm(std::move(s2), PeriodicGrid(1, n1), Tag::equator);
  const std::size_t n_nodes = imm.grid_.size();
  imm.position_.resize(n_nodes, 2);
  imm.diff_.assign(1, Mat(n_nodes, 2));
  imm.second_.assign(1, Mat(n_nodes, 2));
  for (std::size_t k = 0; k < n_nodes; ++k) {
    const double u = imm.grid_.u1(k);
    AmbientJet jet;
    jet.q = Vec{{std::cos(u), std::sin(u), 0.0}};
    jet.dq = {Vec{{-std::sin(u), std::cos(u), 0.0}}};
    jet.ddq = {Vec{{-std::cos(u), -std::sin(u), 0.0}}};
    ChartJet cj = push_through_chart(jet);
    imm.position_.row(k) = cj.x;
    imm.diff_[0].row(k) = cj.dx[0];
    imm.second_[0].row(k) = cj.ddx[0];
  }
  imm.finish_geometry();
  return imm;
}

ParametricImmersion ParametricImmersion::perturbed_torus(
    std::shared_ptr<const SpaceModel> s3, int n1, int n2, double amplitude) {
  // cos(2u1)cos(u2) is not a Jacobi field of the unperturbed torus, so the
  // bump produces first-order mean curvature proportional to the amplitude.
  const std::string alpha = "(pi/4 + " + fmt17(amplitude) + "*cos(2*u1)*cos(u2))";
  ImmersionRecipe recipe;
  recipe.ambient = "s3";
  recipe.ambient_coords = true;
  recipe.components = {
      Expression::parse("cos" + alpha + "*cos(u1)"),
      Expression::parse("cos" + alpha + "*sin(u1)"),
      Expression::parse("sin" + alpha + "*cos(u2)"),
      Expression::parse("sin" + alpha + "*sin(u2)"),
  };
  return from_recipe(std::move(s3), recipe, n1, n2);
}

ParametricImmersion ParametricImmersion::from_recipe(
    std::shared_ptr<const SpaceModel> ambient, const ImmersionRecipe& recipe, int n1,
    int n2) {
  if (!ambient) throw input_error("from_recipe: null ambient model");
  if (ambient->kind() != recipe.ambient)
    throw input_error("from_recipe: recipe ambient '" + recipe.ambient +
                      "' does not match model '" + ambient->kind() + "'");
  const int n = ambient->dim();
  const int d = n - 1;
  if (d != 1 && d != 2)
    throw input_error("from_recipe: only 1d and 2d domains are supported");
  const bool sphere_coords =
      recipe.ambient_coords && ambient->embed_dim() == ambient->dim() + 1;
  if (recipe.ambient_coords && !sphere_coords && !flat_ambient(*ambient))
    throw input_error("from_recipe: ambient coordinates unsupported for model '" +
                      ambient->kind() + "'");
  const int expected = sphere_coords ? n + 1 : n;
  if (static_cast<int>(recipe.components.size()) != expected)
    throw input_error("from_recipe: expected " + std::to_string(expected) +
                      " components, got " + std::to_string(recipe.components.size()));

  PeriodicGrid grid = d == 1 ? PeriodicGrid(1, n1) : PeriodicGrid(2, n1, n2 > 1 ? n2 : n1);
  ParametricImmersion imm(std::move(ambient), grid, Tag::custom);
  const std::size_t n_nodes = grid.size();

  Mat raw(n_nodes, expected);
  for (std::size_t k = 0; k < n_nodes; ++k) {
    const double u1 = grid.u1(k), u2 = d == 2 ? grid.u2(k) : 0.0;
    for (int c = 0; c < expected; ++c) raw(k, c) = recipe.components[c].value(u1, u2);
  }

  imm.position_.resize(n_nodes, n);
  if (sphere_coords) {
    for (std::size_t k = 0; k < n_nodes; ++k) {
      Vec q = raw.row(k);
      double nq = q.norm();
      if (std::abs(nq - 1.0) > 1e-6)
        throw input_error("from_recipe: ambient components leave the unit sphere at node " +
                          std::to_string(k) + " (|f| = " + fmt17(nq) + ")");
      imm.position_.row(k) = chart_point(q);
    }
  } else {
    imm.position_ = raw;
  }

  imm.diff_.assign(d, Mat(n_nodes, n));
  imm.second_.assign(d == 1 ? 1 : 3, Mat(n_nodes, n));
  for (int c = 0; c < n; ++c) {
    Vec col = imm.position_.col(c);
    for (int a = 0; a < d; ++a) imm.diff_[a].col(c) = apply_diff(grid, a, 1, 4, col);
    if (d == 1) {
      imm.second_[0].col(c) = apply_diff(grid, 0, 2, 4, col);
    } else {
      imm.second_[0].col(c) = apply_diff(grid, 0, 2, 4, col);
      imm.second_[1].col(c) = apply_diff(grid, 0, 1, 4, apply_diff(grid, 1, 1, 4, col));
      imm.second_[2].col(c) = apply_diff(grid, 1, 2, 4, col);
    }
  }
  imm.finish_geometry();
  return imm;
}

Mat ExtrinsicData::a_at(std::size_t node, int d) const {
  Mat a(d, d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q) a(p, q) = a_form(node, p * d + q);
  return a;
}

Mat ExtrinsicData::shape_at(std::size_t node, int d) const {
  Mat s(d, d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q) s(p, q) = shape(node, p * d + q);
  return s;
}

namespace {

// Chart value of the reference normal fixing the sign convention: the
// Clifford torus normal points toward the first-factor core circle, equators
// point outward in the chart.
Vec oriented_reference(const ParametricImmersion& imm, std::size_t node) {
  if (imm.tag() == ParametricImmersion::Tag::clifford) {
    const double u1 = imm.grid().u1(node), u2 = imm.grid().u2(node);
    const double c = 1.0 / std::sqrt(2.0);
    Vec q = c * Vec{{std::cos(u1), std::sin(u1), std::cos(u2), std::sin(u2)}};
    Vec nu_amb{{std::cos(u1), std::sin(u1), -std::cos(u2), -std::sin(u2)}};
    return chart_jacobian(q) * nu_amb;
  }
  return imm.position().row(node);
}

}  // namespace

ExtrinsicData extrinsic_data(const ParametricImmersion& imm) {
  const int d = imm.domain_dim();
  const int n = imm.chart_dim();
  if (d != n - 1) throw input_error("extrinsic_data: immersion is not a hypersurface");
  const std::size_t n_nodes = imm.grid().size();
  const int n2 = imm.grid().dim() == 2 ? imm.grid().n(1) : 1;

  ExtrinsicData ext;
  ext.normal.resize(n_nodes, n);
  ext.a_form.resize(n_nodes, d * d);
  ext.shape.resize(n_nodes, d * d);
  ext.a_norm2.resize(n_nodes);
  ext.mean_curvature.resize(n_nodes);

  for (std::size_t k = 0; k < n_nodes; ++k) {
    Vec x = imm.position().row(k);
    Mat big_g = imm.ambient().metric(x);
    Eigen::LLT<Mat> llt(big_g);
    Mat t(n, d);
    for (int a = 0; a < d; ++a) t.col(a) = imm.differential(a).row(k);
    Mat t_hat = llt.matrixU() * t;
    Eigen::HouseholderQR<Mat> qr(t_hat);
    Mat q_full = qr.householderQ() * Mat::Identity(n, n);
    Vec nu = llt.matrixU().solve(q_full.col(n - 1));

    if (imm.tag() == ParametricImmersion::Tag::custom) {
      if (k == 0) {
        int kmax = 0;
        nu.cwiseAbs().maxCoeff(&kmax);
        if (nu[kmax] < 0.0) nu = -nu;
      } else {
        std::size_t prev = (k % n2 != 0) ? k - 1 : k - n2;
        Vec nu_prev = ext.normal.row(prev);
        if (nu.dot(big_g * nu_prev) < 0.0) nu = -nu;
      }
    } else {
      Vec ref = oriented_reference(imm, k);
      if (nu.dot(big_g * ref) < 0.0) nu = -nu;
    }
    ext.normal.row(k) = nu;

    std::vector<Mat> gam = imm.ambient().christoffel(x);
    Mat a(d, d);
    for (int p = 0; p < d; ++p)
      for (int q = p; q < d; ++q) {
        Vec w = imm.second_derivative(p, q).row(k);
        for (int c = 0; c < n; ++c) w[c] += t.col(p).dot(gam[c] * t.col(q));
        a(p, q) = nu.dot(big_g * w);
        a(q, p) = a(p, q);
      }
    Mat s = imm.metric_inverse_at(k) * a;
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) {
        ext.a_form(k, p * d + q) = a(p, q);
        ext.shape(k, p * d + q) = s(p, q);
      }
    ext.a_norm2[k] = (s * s).trace();
    ext.mean_curvature[k] = s.trace();
  }
  return ext;
}

MinimalityReport verify_minimal(const ParametricImmersion& imm, const ExtrinsicData& ext) {
  MinimalityReport report;
  for (std::size_t k = 0; k < imm.grid().size(); ++k) {
    double h = std::abs(ext.mean_curvature[k]);
    if (h > report.max_mean_curvature) {
      report.max_mean_curvature = h;
      report.node = k;
    }
  }
  return report;
}

Mat induced_christoffels(const ParametricImmersion& imm) {
  const int d = imm.domain_dim();
  const std::size_t n_nodes = imm.grid().size();
  std::vector<Mat> dg(d, Mat(n_nodes, d * d));
  for (int a = 0; a < d; ++a)
    for (int c = 0; c < d * d; ++c)
      dg[a].col(c) = apply_diff(imm.grid(), a, 1, 4, imm.induced_metric().col(c));

  Mat gamma(n_nodes, d * d * d);
  for (std::size_t k = 0; k < n_nodes; ++k) {
    Mat ginv = imm.metric_inverse_at(k);
    for (int c = 0; c < d; ++c)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          double sum = 0.0;
          for (int e = 0; e < d; ++e)
            sum += ginv(c, e) * (dg[a](k, e * d + b) + dg[b](k, e * d + a) -
                                 dg[e](k, a * d + b));
          gamma(k, (c * d + a) * d + b) = 0.5 * sum;
        }
  }
  return gamma;
}

Vec gauss_residual_field(const ParametricImmersion& imm, const ExtrinsicData& ext) {
  const int d = imm.domain_dim();
  if (d != 2) throw input_error("gauss_residual_field needs a 2d domain");
  const std::size_t n_nodes = imm.grid().size();
  Mat gamma = induced_christoffels(imm);
  std::vector<Mat> dgamma(2, Mat(n_nodes, 8));
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 8; ++c)
      dgamma[a].col(c) = apply_diff(imm.grid(), a, 1, 4, gamma.col(c));

  auto gam = [&](std::size_t k, int c, int a, int b) {
    return gamma(k, (c * 2 + a) * 2 + b);
  };
  Vec out(n_nodes);
  for (std::size_t k = 0; k < n_nodes; ++k) {
    // R^l_{2,1,2} = d_1 Gamma^l_22 - d_2 Gamma^l_12 + Gamma^l_1m Gamma^m_22
    //             - Gamma^l_2m Gamma^m_12, zero-based axes below.
    double lhs = 0.0;
    Mat g = imm.metric_at(k);
    for (int l = 0; l < 2; ++l) {
      double r = dgamma[0](k, (l * 2 + 1) * 2 + 1) - dgamma[1](k, (l * 2 + 0) * 2 + 1);
      for (int m = 0; m < 2; ++m)
        r += gam(k, l, 0, m) * gam(k, m, 1, 1) - gam(k, l, 1, m) * gam(k, m, 0, 1);
      lhs += g(0, l) * r;
    }
    Vec x = imm.position().row(k);
    Vec t1 = imm.differential(0).row(k);
    Vec t2 = imm.differential(1).row(k);
    Mat big_g = imm.ambient().metric(x);
    double amb = imm.ambient().curvature(x, t1, t2, t2).dot(big_g * t1);
    Mat a = ext.a_at(k, 2);
    double rhs = amb + a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    out[k] = std::abs(lhs - rhs);
  }
  return out;
}

CodazziEvaluator::CodazziEvaluator(const ParametricImmersion& imm, const ExtrinsicData& ext)
    : imm_(imm), ext_(ext), applicable_(!flat_ambient(imm.ambient())) {
  if (!applicable_) return;
  const int d = imm.domain_dim();
  gamma_ = induced_christoffels(imm);
  da_.assign(d, Mat(imm.grid().size(), d * d));
  for (int a = 0; a < d; ++a)
    for (int c = 0; c < d * d; ++c)
      da_[a].col(c) = apply_diff(imm.grid(), a, 1, 4, ext.a_form.col(c));
}

std::optional<double> CodazziEvaluator::residual(std::size_t node, const Vec& x,
                                                 const Vec& y, const Vec& z) const {
  if (!applicable_) return std::nullopt;
  const int d = imm_.domain_dim();
  if (x.size() != d || y.size() != d || z.size() != d)
    throw input_error("codazzi residual: arguments must have the domain dimension");

  auto gam = [&](int c, int a, int b) { return gamma_(node, (c * d + a) * d + b); };
  auto a_of = [&](int p, int q) { return ext_.a_form(node, p * d + q); };
  auto nabla_a = [&](int a, int b, int c) {
    double v = da_[a](node, b * d + c);
    for (int e = 0; e < d; ++e) v -= gam(e, a, b) * a_of(e, c) + gam(e, a, c) * a_of(b, e);
    return v;
  };
  auto contract = [&](const Vec& p, const Vec& q) {
    double sum = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) sum += p[a] * q[b] * z[c] * nabla_a(a, b, c);
    return sum;
  };
  double lhs = contract(x, y) - contract(y, x);

  Vec xc = Vec::Zero(imm_.chart_dim());
  Vec yc = xc, zc = xc;
  for (int a = 0; a < d; ++a) {
    xc += x[a] * imm_.differential(a).row(node).transpose();
    yc += y[a] * imm_.differential(a).row(node).transpose();
    zc += z[a] * imm_.differential(a).row(node).transpose();
  }
  Vec pos = imm_.position().row(node);
  Mat big_g = imm_.ambient().metric(pos);
  Vec nu = ext_.normal.row(node);
  double rhs = imm_.ambient().curvature(pos, xc, yc, zc).dot(big_g * nu);
  return std::abs(lhs - rhs);
}

TwoChartSphereImmersion::TwoChartSphereImmersion(std::shared_ptr<const SpaceModel> ambient,
                                                 Kind kind, double radius)
    : ambient_(std::move(ambient)), kind_(kind), radius_(radius) {}

TwoChartSphereImmersion TwoChartSphereImmersion::equator_in_s3(
    std::shared_ptr<const SpaceModel> s3) {
  if (!s3 || s3->kind() != "s3")
    throw input_error("equator_in_s3 requires the s3 model");
  return TwoChartSphereImmersion(std::move(s3), Kind::equator, 1.0);
}

TwoChartSphereImmersion TwoChartSphereImmersion::round_sphere(
    std::shared_ptr<const SpaceModel> euclid3, double radius) {
  if (!euclid3 || euclid3->kind() != "euclid:3")
    throw input_error("round_sphere requires the euclid:3 model");
  if (!(radius > 0.0)) throw input_error("round_sphere: radius must be positive");
  return TwoChartSphereImmersion(std::move(euclid3), Kind::round, radius);
}

double TwoChartSphereImmersion::support_radius() const {
  return std::sqrt((1.0 + band_) / (1.0 - band_));
}

namespace {

int chart_sign(int chart) {
  if (chart != 0 && chart != 1) throw input_error("two-chart sphere: chart must be 0 or 1");
  return chart == 0 ? 1 : -1;
}

double quintic_ramp(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double quintic_ramp_slope(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double omt = 1.0 - t;
  return 30.0 * t * t * omt * omt;
}

}  // namespace

Vec TwoChartSphereImmersion::position(int chart, const Vec& y) const {
  const int sgn = chart_sign(chart);
  const double t = 1.0 + y.squaredNorm();
  return radius_ / t * Vec{{2.0 * y[0], 2.0 * y[1], sgn * (1.0 - y.squaredNorm())}};
}

Mat TwoChartSphereImmersion::differential(int chart, const Vec& y) const {
  const int sgn = chart_sign(chart);
  const double t = 1.0 + y.squaredNorm();
  const double t2 = t * t;
  Mat j(3, 2);
  for (int b = 0; b < 2; ++b) {
    for (int i = 0; i < 2; ++i)
      j(i, b) = 2.0 * (i == b ? 1.0 : 0.0) / t - 4.0 * y[i] * y[b] / t2;
    j(2, b) = -sgn * 4.0 * y[b] / t2;
  }
  return radius_ * j;
}

Mat TwoChartSphereImmersion::induced_metric(int chart, const Vec& y) const {
  chart_sign(chart);
  const double t = 1.0 + y.squaredNorm();
  return (4.0 * radius_ * radius_ / (t * t)) * Mat::Identity(2, 2);
}

Vec TwoChartSphereImmersion::normal(int chart, const Vec& y) const {
  return position(chart, y) / radius_;
}

Mat TwoChartSphereImmersion::second_fundamental(int chart, const Vec& y) const {
  if (kind_ == Kind::equator) {
    chart_sign(chart);
    return Mat::Zero(2, 2);
  }
  return -(1.0 / radius_) * induced_metric(chart, y);
}

double TwoChartSphereImmersion::a_norm2(int chart, const Vec& y) const {
  chart_sign(chart);
  (void)y;
  return kind_ == Kind::equator ? 0.0 : 2.0 / (radius_ * radius_);
}

double TwoChartSphereImmersion::potential(int chart, const Vec& y) const {
  Vec x = position(chart, y);
  Vec nu = normal(chart, y);
  return nu.dot(ambient_->ricci(x) * nu) + a_norm2(chart, y);
}

double TwoChartSphereImmersion::height(int chart, const Vec& y) const {
  const int sgn = chart_sign(chart);
  return sgn * (1.0 - y.squaredNorm()) / (1.0 + y.squaredNorm());
}

double TwoChartSphereImmersion::weight(int chart, const Vec& y) const {
  const double z = height(chart, y);
  const double s = quintic_ramp((z + band_) / (2.0 * band_));
  return chart == 0 ? s : 1.0 - s;
}

Vec TwoChartSphereImmersion::weight_gradient(int chart, const Vec& y) const {
  const int sgn = chart_sign(chart);
  const double t = 1.0 + y.squaredNorm();
  const double z = height(chart, y);
  Vec dz = sgn * (-4.0 / (t * t)) * y;
  const double slope = quintic_ramp_slope((z + band_) / (2.0 * band_)) / (2.0 * band_);
  return (chart == 0 ? slope : -slope) * dz;
}

Vec TwoChartSphereImmersion::transition(const Vec& y) {
  const double r2 = y.squaredNorm();
  if (!(r2 > 0.0)) throw input_error("two-chart sphere: transition undefined at the origin");
  return y / r2;
}

Mat TwoChartSphereImmersion::transition_differential(const Vec& y) {
  const double r2 = y.squaredNorm();
  if (!(r2 > 0.0)) throw input_error("two-chart sphere: transition undefined at the origin");
  return (Mat::Identity(2, 2) * r2 - 2.0 * y * y.transpose()) / (r2 * r2);
}

}  // namespace minlab
