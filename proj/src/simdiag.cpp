#include "minlab/simdiag.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>
#include <utility>

namespace minlab {

namespace {

constexpr double kCommutatorTol = 1e-10;
constexpr double kSymmetryTol = 1e-9;
constexpr double kBlockGapRel = 1e-6;
constexpr int kMaxDim = 8;  // slot assignment enumerates permutations

std::string node_label(const CommutingPair& pair, int node) {
  std::ostringstream os;
  os << "(" << node / pair.n2 << ", " << node % pair.n2 << ")";
  return os.str();
}

void check_pair_shape(const CommutingPair& pair) {
  if (pair.dim < 1 || pair.dim > kMaxDim)
    throw input_error("commuting pair: fiber dimension must be between 1 and 8");
  if (pair.n1 < 1 || pair.n2 < 1) throw input_error("commuting pair: empty patch");
  if (!(pair.spacing > 0.0)) throw input_error("commuting pair: spacing must be positive");
  const auto nodes = static_cast<std::size_t>(pair.nodes());
  if (pair.metric.size() != nodes || pair.alpha.size() != nodes || pair.beta.size() != nodes)
    throw input_error("commuting pair: field arrays must hold one matrix per patch node");
  for (const auto* field : {&pair.metric, &pair.alpha, &pair.beta})
    for (const Mat& m : *field)
      if (m.rows() != pair.dim || m.cols() != pair.dim)
        throw input_error("commuting pair: field matrices must be dim x dim");
}

// Eigen-decompositions of both operators expressed in metric-orthonormal
// coordinates at one node, plus the map back to chart components.
struct NodeFactors {
  Mat chart_from_on;  // L^{-T}: orthonormal components -> chart components
  Mat a_hat;          // symmetric representative of g^{-1} alpha
  Mat b_hat;
  Vec lam;            // ascending eigenvalues of a_hat
  Mat vhat;           // orthonormal eigenvectors of a_hat
};

NodeFactors node_factors(const CommutingPair& pair, int node) {
  const Mat& g = pair.metric[static_cast<std::size_t>(node)];
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol)
    throw input_error("commuting pair: metric is not symmetric at node " +
                      node_label(pair, node));
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success)
    throw input_error("commuting pair: metric is not positive definite at node " +
                      node_label(pair, node));
  NodeFactors f;
  Mat lower = llt.matrixL();
  Mat identity = Mat::Identity(pair.dim, pair.dim);
  f.chart_from_on = lower.transpose().triangularView<Eigen::Upper>().solve(identity);
  Mat alpha_half = lower.triangularView<Eigen::Lower>().solve(
      pair.alpha[static_cast<std::size_t>(node)]);
  Mat beta_half =
      lower.triangularView<Eigen::Lower>().solve(pair.beta[static_cast<std::size_t>(node)]);
  f.a_hat = lower.triangularView<Eigen::Lower>().solve(alpha_half.transpose()).transpose();
  f.b_hat = lower.triangularView<Eigen::Lower>().solve(beta_half.transpose()).transpose();
  f.a_hat = 0.5 * (f.a_hat + f.a_hat.transpose()).eval();
  f.b_hat = 0.5 * (f.b_hat + f.b_hat.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> eig(f.a_hat);
  if (eig.info() != Eigen::Success)
    throw numeric_error("commuting pair: eigensolver failed at node " + node_label(pair, node));
  f.lam = eig.eigenvalues();
  f.vhat = eig.eigenvectors();
  return f;
}

// Partition an ascending eigenvalue list into blocks: a gap at most `tol`
// keeps neighbors in the same block.
std::vector<std::pair<int, int>> gap_blocks(const Vec& values, double tol) {
  std::vector<std::pair<int, int>> blocks;
  int begin = 0;
  for (int k = 1; k < values.size(); ++k) {
    if (values(k) - values(k - 1) > tol) {
      blocks.emplace_back(begin, k);
      begin = k;
    }
  }
  blocks.emplace_back(begin, static_cast<int>(values.size()));
  return blocks;
}

// Spectral diameters of both operators over the whole patch; they scale the
// block-detection gap.
struct PatchDiameters {
  double a = 0.0;
  double b = 0.0;
};

PatchDiameters patch_diameters(const CommutingPair& pair,
                               const std::vector<NodeFactors>& factors) {
  double a_min = 0.0, a_max = 0.0, b_min = 0.0, b_max = 0.0;
  bool first = true;
  for (const NodeFactors& f : factors) {
    Eigen::SelfAdjointEigenSolver<Mat> beig(f.b_hat, Eigen::EigenvaluesOnly);
    double bmn = beig.eigenvalues().minCoeff();
    double bmx = beig.eigenvalues().maxCoeff();
    if (first) {
      a_min = f.lam.minCoeff();
      a_max = f.lam.maxCoeff();
      b_min = bmn;
      b_max = bmx;
      first = false;
    } else {
      a_min = std::min(a_min, f.lam.minCoeff());
      a_max = std::max(a_max, f.lam.maxCoeff());
      b_min = std::min(b_min, bmn);
      b_max = std::max(b_max, bmx);
    }
  }
  (void)pair;
  return {a_max - a_min, b_max - b_min};
}

// Joint candidate frame at one node in sorted order: first-stage eigenvector
// blocks of A refined by diagonalizing B inside each block. Columns are
// g-orthonormal chart vectors; kappa_a/kappa_b carry the slot eigenvalues and
// `groups` the joint-degeneracy ranges (same A-block and same B-eigenvalue).
struct Candidates {
  Mat cols;
  Vec kappa_a;
  Vec kappa_b;
  std::vector<int> a_pattern;               // first-stage block sizes
  std::vector<std::pair<int, int>> groups;  // joint blocks, [begin, end)
};

Candidates joint_candidates(const NodeFactors& f, const PatchDiameters& diam) {
  const int m = static_cast<int>(f.lam.size());
  Candidates c;
  Mat cand_hat(m, m);
  c.kappa_a = Vec(m);
  c.kappa_b = Vec(m);
  const double tol_a = kBlockGapRel * diam.a;
  const double tol_b = kBlockGapRel * diam.b;
  for (const auto& blk : gap_blocks(f.lam, tol_a)) {
    const int b0 = blk.first;
    const int sz = blk.second - blk.first;
    c.a_pattern.push_back(sz);
    Mat vblk = f.vhat.middleCols(b0, sz);
    Mat b_small = vblk.transpose() * f.b_hat * vblk;
    b_small = 0.5 * (b_small + b_small.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> beig(b_small);
    if (beig.info() != Eigen::Success)
      throw numeric_error("commuting pair: second-stage eigensolver failed");
    cand_hat.middleCols(b0, sz) = vblk * beig.eigenvectors();
    const double lam_mean = f.lam.segment(b0, sz).mean();
    for (const auto& sub : gap_blocks(beig.eigenvalues(), tol_b)) {
      const int s0 = sub.first;
      const int ssz = sub.second - sub.first;
      const double mu_mean = beig.eigenvalues().segment(s0, ssz).mean();
      for (int k = 0; k < ssz; ++k) {
        c.kappa_a(b0 + s0 + k) = lam_mean;
        c.kappa_b(b0 + s0 + k) = mu_mean;
      }
      c.groups.emplace_back(b0 + s0, b0 + s0 + ssz);
    }
  }
  c.cols = f.chart_from_on * cand_hat;
  return c;
}

// Flip each column so its largest-magnitude entry is positive.
void canonical_signs(Mat& cols) {
  for (int c = 0; c < cols.cols(); ++c) {
    int row = 0;
    cols.col(c).cwiseAbs().maxCoeff(&row);
    if (cols(row, c) < 0.0) cols.col(c) *= -1.0;
  }
}

// Assignment of candidates to slots maximizing the total unsigned overlap;
// brute force over permutations (fiber dimension is at most 8).
std::vector<int> best_assignment(const Mat& abs_overlap) {
  const int m = static_cast<int>(abs_overlap.rows());
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_score = -1.0;
  do {
    double score = 0.0;
    for (int a = 0; a < m; ++a) score += abs_overlap(a, perm[static_cast<std::size_t>(a)]);
    if (score > best_score) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Breadth-first node ordering from the patch center; parent[k] = -1 marks the
// seed. Adjacency is 4-neighbor inside the rectangle, no wraparound.
void bfs_order(const CommutingPair& pair, std::vector<int>* order, std::vector<int>* parent) {
  const int nodes = pair.nodes();
  order->clear();
  parent->assign(static_cast<std::size_t>(nodes), -2);
  const int seed = pair.index(pair.n1 / 2, pair.n2 / 2);
  std::queue<int> queue;
  queue.push(seed);
  (*parent)[static_cast<std::size_t>(seed)] = -1;
  while (!queue.empty()) {
    const int node = queue.front();
    queue.pop();
    order->push_back(node);
    const int i = node / pair.n2;
    const int j = node % pair.n2;
    const int di[] = {1, -1, 0, 0};
    const int dj[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int ni = i + di[k];
      const int nj = j + dj[k];
      if (ni < 0 || ni >= pair.n1 || nj < 0 || nj >= pair.n2) continue;
      const int next = pair.index(ni, nj);
      if ((*parent)[static_cast<std::size_t>(next)] != -2) continue;
      (*parent)[static_cast<std::size_t>(next)] = node;
      queue.push(next);
    }
  }
}

double g_norm(const Mat& g, const Vec& v) {
  const double q = v.dot(g * v);
  return std::sqrt(std::max(q, 0.0));
}

}  // namespace

Mat CommutingPair::a_at(int node) const {
  Eigen::LLT<Mat> llt(metric[static_cast<std::size_t>(node)]);
  if (llt.info() != Eigen::Success)
    throw input_error("commuting pair: metric is not positive definite at node " +
                      node_label(*this, node));
  return llt.solve(alpha[static_cast<std::size_t>(node)]);
}

Mat CommutingPair::b_at(int node) const {
  Eigen::LLT<Mat> llt(metric[static_cast<std::size_t>(node)]);
  if (llt.info() != Eigen::Success)
    throw input_error("commuting pair: metric is not positive definite at node " +
                      node_label(*this, node));
  return llt.solve(beta[static_cast<std::size_t>(node)]);
}

double CommutingPair::max_commutator() const {
  double worst = 0.0;
  for (int node = 0; node < nodes(); ++node) {
    Mat a = a_at(node);
    Mat b = b_at(node);
    worst = std::max(worst, (a * b - b * a).norm());
  }
  return worst;
}

CommutingPair make_commuting_pair(int n1, int n2, double spacing, std::vector<Mat> metric,
                                  std::vector<Mat> alpha, std::vector<Mat> beta) {
  CommutingPair pair;
  pair.dim = metric.empty() ? 0 : static_cast<int>(metric.front().rows());
  pair.n1 = n1;
  pair.n2 = n2;
  pair.spacing = spacing;
  pair.metric = std::move(metric);
  pair.alpha = std::move(alpha);
  pair.beta = std::move(beta);
  check_pair_shape(pair);
  for (int node = 0; node < pair.nodes(); ++node) {
    for (const auto* field : {&pair.alpha, &pair.beta}) {
      const Mat& m = (*field)[static_cast<std::size_t>(node)];
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol)
        throw input_error("commuting pair: bilinear field is not symmetric at node " +
                          node_label(pair, node));
    }
    node_factors(pair, node);  // validates the metric
  }
  const double comm = pair.max_commutator();
  if (comm > kCommutatorTol) {
    std::ostringstream os;
    os << "commuting pair: operators do not commute, worst [A,B] norm " << comm;
    throw input_error(os.str());
  }
  return pair;
}

CommutingPair field_pair(int n1, int n2, double extent, int dim,
                         const std::function<Mat(double, double)>& alpha_of,
                         const std::function<Mat(double, double)>& beta_of) {
  if (n1 < 1 || n2 < 1) throw input_error("field pair: empty patch");
  if (!(extent > 0.0)) throw input_error("field pair: extent must be positive");
  if (!alpha_of || !beta_of) throw input_error("field pair: missing field callbacks");
  const double h = extent / n1;
  std::vector<Mat> metric, alpha, beta;
  metric.reserve(static_cast<std::size_t>(n1) * n2);
  alpha.reserve(metric.capacity());
  beta.reserve(metric.capacity());
  for (int i = 0; i < n1; ++i) {
    const double u = (i + 0.5) * h - 0.5 * extent;
    for (int j = 0; j < n2; ++j) {
      const double v = n2 == 1 ? 0.0 : (j + 0.5) * h - 0.5 * extent;
      metric.push_back(Mat::Identity(dim, dim));
      alpha.push_back(alpha_of(u, v));
      beta.push_back(beta_of(u, v));
    }
  }
  return make_commuting_pair(n1, n2, h, std::move(metric), std::move(alpha), std::move(beta));
}

CommutingPair shape_operator_pair(const ParametricImmersion& imm, const ExtrinsicData& ext,
                                  int i0, int j0, int n1, int n2) {
  const PeriodicGrid& grid = imm.grid();
  const int d = imm.domain_dim();
  if (i0 < 0 || n1 < 1 || i0 + n1 > grid.n(0))
    throw input_error("shape pair: node window exceeds the grid in direction 1");
  if (d == 1) {
    if (j0 != 0 || n2 != 1)
      throw input_error("shape pair: a curve patch must have a single node row");
  } else if (j0 < 0 || n2 < 1 || j0 + n2 > grid.n(1)) {
    throw input_error("shape pair: node window exceeds the grid in direction 2");
  }
  std::vector<Mat> metric, alpha, beta;
  metric.reserve(static_cast<std::size_t>(n1) * n2);
  alpha.reserve(metric.capacity());
  beta.reserve(metric.capacity());
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const std::size_t node = grid.index(i0 + i, j0 + j);
      metric.push_back(imm.metric_at(node));
      Mat a = ext.a_at(node, d);
      alpha.push_back(a);
      beta.push_back(a);
    }
  }
  return make_commuting_pair(n1, n2, grid.h(0), std::move(metric), std::move(alpha),
                             std::move(beta));
}

EigenvalueFields sorted_eigenvalue_fields(const CommutingPair& pair) {
  check_pair_shape(pair);
  EigenvalueFields out;
  out.values = Mat(pair.nodes(), pair.dim);
  for (int node = 0; node < pair.nodes(); ++node) {
    NodeFactors f = node_factors(pair, node);
    out.values.row(node) = f.lam.transpose();
  }
  for (int i = 0; i < pair.n1; ++i) {
    for (int j = 0; j < pair.n2; ++j) {
      const int node = pair.index(i, j);
      for (int axis = 0; axis < 2; ++axis) {
        const int ni = i + (axis == 0 ? 1 : 0);
        const int nj = j + (axis == 0 ? 0 : 1);
        if (ni >= pair.n1 || nj >= pair.n2) continue;
        const int other = pair.index(ni, nj);
        const double jump =
            (out.values.row(node) - out.values.row(other)).cwiseAbs().maxCoeff();
        out.max_adjacent_jump = std::max(out.max_adjacent_jump, jump);
      }
    }
  }
  return out;
}

double frame_distance(const Mat& g, const Mat& f1, const Mat& f2, bool allow_permutation) {
  if (f1.rows() != f2.rows() || f1.cols() != f2.cols() || g.rows() != f1.rows() ||
      g.cols() != f1.rows())
    throw input_error("frame distance: shape mismatch");
  const int m = static_cast<int>(f1.cols());
  Mat overlap = f1.transpose() * g * f2;
  std::vector<int> slot(static_cast<std::size_t>(m));
  std::iota(slot.begin(), slot.end(), 0);
  if (allow_permutation) slot = best_assignment(overlap.cwiseAbs());
  double worst = 0.0;
  for (int a = 0; a < m; ++a) {
    const int b = slot[static_cast<std::size_t>(a)];
    const double sign = overlap(a, b) >= 0.0 ? 1.0 : -1.0;
    Vec diff = sign * f1.col(a) - f2.col(b);
    worst = std::max(worst, g_norm(g, diff));
  }
  return worst;
}

SmoothFrameResult simultaneous_diagonalize(const CommutingPair& pair) {
  check_pair_shape(pair);
  const int nodes = pair.nodes();
  const int m = pair.dim;

  std::vector<NodeFactors> factors;
  factors.reserve(static_cast<std::size_t>(nodes));
  for (int node = 0; node < nodes; ++node) factors.push_back(node_factors(pair, node));
  const PatchDiameters diam = patch_diameters(pair, factors);

  std::vector<Candidates> cands;
  cands.reserve(static_cast<std::size_t>(nodes));
  for (int node = 0; node < nodes; ++node)
    cands.push_back(joint_candidates(factors[static_cast<std::size_t>(node)], diam));

  std::vector<int> order, parent;
  bfs_order(pair, &order, &parent);

  const std::vector<int>& pattern = cands[static_cast<std::size_t>(order.front())].a_pattern;
  for (int node : order) {
    if (cands[static_cast<std::size_t>(node)].a_pattern != pattern) {
      std::ostringstream os;
      os << "first-stage multiplicity pattern changes inside the patch at node "
         << node_label(pair, node) << "; split the patch there";
      throw geometry_error(os.str());
    }
  }

  SmoothFrameResult out;
  out.multiplicities = pattern;
  out.frame.assign(static_cast<std::size_t>(nodes), Mat());
  out.kappa_a = Mat(nodes, m);
  out.kappa_b = Mat(nodes, m);

  for (int node : order) {
    Candidates& cand = cands[static_cast<std::size_t>(node)];
    const int from = parent[static_cast<std::size_t>(node)];
    Mat frame(m, m);
    Vec ka(m), kb(m);
    if (from < 0) {
      canonical_signs(cand.cols);
      frame = cand.cols;
      ka = cand.kappa_a;
      kb = cand.kappa_b;
    } else {
      const Mat& g = pair.metric[static_cast<std::size_t>(node)];
      const Mat& ref = out.frame[static_cast<std::size_t>(from)];
      Mat overlap = cand.cols.transpose() * g * ref;
      std::vector<int> slot = best_assignment(overlap.cwiseAbs());
      std::vector<bool> rotated(static_cast<std::size_t>(m), false);
      for (const auto& group : cand.groups) {
        const int k = group.second - group.first;
        if (k < 2) continue;
        Mat cgrp = cand.cols.middleCols(group.first, k);
        Mat pgrp(m, k);
        for (int t = 0; t < k; ++t)
          pgrp.col(t) = ref.col(slot[static_cast<std::size_t>(group.first + t)]);
        Mat cross = cgrp.transpose() * g * pgrp;
        Eigen::JacobiSVD<Mat> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Mat rotated_grp = cgrp * (svd.matrixU() * svd.matrixV().transpose());
        for (int t = 0; t < k; ++t) {
          const int a = group.first + t;
          frame.col(slot[static_cast<std::size_t>(a)]) = rotated_grp.col(t);
          rotated[static_cast<std::size_t>(a)] = true;
        }
      }
      for (int a = 0; a < m; ++a) {
        const int b = slot[static_cast<std::size_t>(a)];
        if (!rotated[static_cast<std::size_t>(a)]) {
          const double sign = overlap(a, b) >= 0.0 ? 1.0 : -1.0;
          frame.col(b) = sign * cand.cols.col(a);
        }
        ka(b) = cand.kappa_a(a);
        kb(b) = cand.kappa_b(a);
      }
    }
    out.frame[static_cast<std::size_t>(node)] = frame;
    out.kappa_a.row(node) = ka.transpose();
    out.kappa_b.row(node) = kb.transpose();
  }

  const Mat identity = Mat::Identity(m, m);
  for (int node = 0; node < nodes; ++node) {
    const Mat& g = pair.metric[static_cast<std::size_t>(node)];
    const Mat& frame = out.frame[static_cast<std::size_t>(node)];
    out.ortho_residual = std::max(
        out.ortho_residual, (frame.transpose() * g * frame - identity).cwiseAbs().maxCoeff());
    Mat a = pair.a_at(node);
    Mat b = pair.b_at(node);
    for (int c = 0; c < m; ++c) {
      const Vec col = frame.col(c);
      out.eigen_residual =
          std::max(out.eigen_residual, (a * col - out.kappa_a(node, c) * col).norm());
      out.eigen_residual =
          std::max(out.eigen_residual, (b * col - out.kappa_b(node, c) * col).norm());
    }
  }
  for (int i = 0; i < pair.n1; ++i) {
    for (int j = 0; j < pair.n2; ++j) {
      const int node = pair.index(i, j);
      for (int axis = 0; axis < 2; ++axis) {
        const int ni = i + (axis == 0 ? 1 : 0);
        const int nj = j + (axis == 0 ? 0 : 1);
        if (ni >= pair.n1 || nj >= pair.n2) continue;
        const int other = pair.index(ni, nj);
        const double dev = frame_distance(pair.metric[static_cast<std::size_t>(node)],
                                          out.frame[static_cast<std::size_t>(node)],
                                          out.frame[static_cast<std::size_t>(other)], true);
        out.smoothness_score = std::max(out.smoothness_score, dev);
      }
    }
  }
  return out;
}

Mat joint_eigenvectors_at(const CommutingPair& pair, int node) {
  check_pair_shape(pair);
  if (node < 0 || node >= pair.nodes())
    throw input_error("joint eigenvectors: node index out of range");
  std::vector<NodeFactors> factors;
  factors.reserve(static_cast<std::size_t>(pair.nodes()));
  for (int k = 0; k < pair.nodes(); ++k) factors.push_back(node_factors(pair, k));
  const PatchDiameters diam = patch_diameters(pair, factors);
  Candidates cand = joint_candidates(factors[static_cast<std::size_t>(node)], diam);
  canonical_signs(cand.cols);
  return cand.cols;
}

double naive_frame_score(const CommutingPair& pair) {
  check_pair_shape(pair);
  std::vector<NodeFactors> factors;
  factors.reserve(static_cast<std::size_t>(pair.nodes()));
  for (int k = 0; k < pair.nodes(); ++k) factors.push_back(node_factors(pair, k));
  const PatchDiameters diam = patch_diameters(pair, factors);
  std::vector<Mat> frames;
  frames.reserve(static_cast<std::size_t>(pair.nodes()));
  for (int k = 0; k < pair.nodes(); ++k) {
    Candidates cand = joint_candidates(factors[static_cast<std::size_t>(k)], diam);
    canonical_signs(cand.cols);
    frames.push_back(cand.cols);
  }
  double score = 0.0;
  for (int i = 0; i < pair.n1; ++i) {
    for (int j = 0; j < pair.n2; ++j) {
      const int node = pair.index(i, j);
      for (int axis = 0; axis < 2; ++axis) {
        const int ni = i + (axis == 0 ? 1 : 0);
        const int nj = j + (axis == 0 ? 0 : 1);
        if (ni >= pair.n1 || nj >= pair.n2) continue;
        const int other = pair.index(ni, nj);
        score = std::max(score, frame_distance(pair.metric[static_cast<std::size_t>(node)],
                                               frames[static_cast<std::size_t>(node)],
                                               frames[static_cast<std::size_t>(other)], false));
      }
    }
  }
  return score;
}

}  // namespace minlab
