#include "minlab/spectrum.hpp"

#include <lapacke.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace minlab {

namespace {

void validate_operator(const DiscreteOperator& op, int k) {
  const auto n = static_cast<long>(op.size);
  if (n == 0 || op.stiffness.rows() != n || op.stiffness.cols() != n ||
      op.mass.size() != n || op.potential.size() != n) {
    throw input_error("operator fields disagree on the node count");
  }
  if (op.mass.minCoeff() <= 0.0) {
    throw input_error("operator mass weights must be positive");
  }
  if (k < 1 || k > n) {
    throw input_error("eigenvalue count must lie between 1 and the node count");
  }
}

void count_window(SpectrumReport& report) {
  report.index = 0;
  report.nullity = 0;
  for (long i = 0; i < report.eigenvalues.size(); ++i) {
    const double ev = report.eigenvalues(i);
    if (ev < -report.tol_zero) {
      ++report.index;
    } else if (ev <= report.tol_zero) {
      ++report.nullity;
    }
  }
}

SpectrumReport dense_spectrum(const DiscreteOperator& op, int k, double tol_zero) {
  const auto n = static_cast<long>(op.size);
  const Vec d = op.mass.cwiseSqrt();
  Mat b = Mat(op.form_matrix());
  for (long j = 0; j < n; ++j) {
    b.col(j) = b.col(j).array() / (d.array() * d(j));
  }

  Vec w(n);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n), b.data(),
                     static_cast<lapack_int>(n), w.data());
  if (info != 0) {
    throw numeric_error("dense eigenvalue solver failed (info " + std::to_string(info) +
                        ")");
  }

  SpectrumReport report;
  report.size = op.size;
  report.tol_zero = tol_zero;
  report.method = "dense";
  report.eigenvalues = w.head(k);
  report.vectors = Mat(n, k);
  for (int i = 0; i < k; ++i) {
    report.vectors.col(i) = b.col(i).array() / d.array();
  }
  count_window(report);
  return report;
}

Vec start_vector(long n, int phase) {
  std::mt19937 rng(20240901u + static_cast<unsigned>(phase));
  Vec v(n);
  for (long i = 0; i < n; ++i) {
    v(i) = static_cast<double>(rng()) * 0x1.0p-32 - 0.5;
  }
  return v;
}

SpectrumReport lanczos_spectrum(const DiscreteOperator& op, int k, double tol_zero,
                                const SpectrumOptions& opts) {
  const auto n = static_cast<long>(op.size);
  const double pot_max =
      op.potential.size() > 0 ? std::max(0.0, op.potential.maxCoeff()) : 0.0;
  const double shift = -pot_max - 1.0;

  std::vector<Triplet> trips;
  trips.reserve(op.size);
  for (long i = 0; i < n; ++i) {
    trips.emplace_back(static_cast<int>(i), static_cast<int>(i), -shift * op.mass(i));
  }
  SpMat diag(n, n);
  diag.setFromTriplets(trips.begin(), trips.end());
  const SpMat shifted = SpMat(op.form_matrix() + diag);

  Eigen::SimplicialLDLT<SpMat> solver;
  solver.compute(shifted);
  if (solver.info() != Eigen::Success) {
    throw numeric_error("shifted operator factorization failed");
  }

  const int m =
      std::min<long>(n, opts.max_lanczos > 0 ? opts.max_lanczos
                                             : std::max(8 * k + 80, 200));
  if (m < k) throw input_error("iteration budget is below the eigenvalue count");

  const Vec& mass = op.mass;
  auto mdot = [&mass](const Vec& a, const Vec& b) {
    return (a.array() * mass.array() * b.array()).sum();
  };

  Mat v(n, m);
  Vec alpha = Vec::Zero(m);
  Vec beta = Vec::Zero(m);
  int phase = 0;
  {
    Vec v0 = start_vector(n, phase++);
    v.col(0) = v0 / std::sqrt(mdot(v0, v0));
  }

  int steps = 0;
  int last_injection = 0;
  double worst = 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> tri;
  for (int j = 0; j < m; ++j) {
    Vec w = solver.solve((mass.array() * v.col(j).array()).matrix());
    alpha(j) = mdot(w, v.col(j));
    w -= alpha(j) * v.col(j);
    if (j > 0) w -= beta(j - 1) * v.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        w -= mdot(w, v.col(i)) * v.col(i);
      }
    }
    const double b = std::sqrt(std::max(0.0, mdot(w, w)));
    beta(j) = b;
    steps = j + 1;

    double scale = 1e-300;
    for (int i = 0; i <= j; ++i) scale = std::max({scale, std::abs(alpha(i)), beta(i)});
    const bool breakdown = b <= 1e-14 * scale;

    // An exact invariant subspace may miss copies of degenerate eigenvalues;
    // restart with a fresh direction instead of trusting the zero residual.
    bool space_complete = false;
    if (j + 1 < m) {
      if (breakdown) {
        beta(j) = 0.0;
        last_injection = steps;
        bool injected = false;
        for (int attempt = 0; attempt < 3 && !injected; ++attempt) {
          Vec fresh = start_vector(n, phase++);
          const double nf0 = std::sqrt(mdot(fresh, fresh));
          for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i <= j; ++i) {
              fresh -= mdot(fresh, v.col(i)) * v.col(i);
            }
          }
          const double nf = std::sqrt(std::max(0.0, mdot(fresh, fresh)));
          if (nf > 1e-8 * nf0) {
            v.col(j + 1) = fresh / nf;
            injected = true;
          }
        }
        space_complete = !injected;
      } else {
        v.col(j + 1) = w / b;
      }
    }

    const bool settled = steps >= last_injection + 10 || space_complete || steps == m;
    const bool check =
        steps >= k && settled && (space_complete || steps == m || (steps - k) % 5 == 0);
    if (check) {
      Mat t = Mat::Zero(steps, steps);
      for (int i = 0; i < steps; ++i) {
        t(i, i) = alpha(i);
        if (i + 1 < steps) {
          t(i, i + 1) = beta(i);
          t(i + 1, i) = beta(i);
        }
      }
      tri.compute(t);
      worst = 0.0;
      bool converged = true;
      for (int i = 0; i < k; ++i) {
        const int col = steps - 1 - i;
        const double theta = tri.eigenvalues()(col);
        if (theta <= 0.0) {
          throw numeric_error("shift-invert spectrum left the positive cone");
        }
        const double resid =
            beta(j) * std::abs(tri.eigenvectors()(steps - 1, col)) / theta;
        worst = std::max(worst, resid);
        if (resid > opts.residual_tol) converged = false;
      }
      if (converged || (space_complete && worst <= std::sqrt(opts.residual_tol))) {
        SpectrumReport report;
        report.size = op.size;
        report.tol_zero = tol_zero;
        report.method = "lanczos";
        report.iterations = steps;
        report.eigenvalues = Vec(k);
        report.vectors = Mat(n, k);
        for (int i = 0; i < k; ++i) {
          const int col = steps - 1 - i;
          report.eigenvalues(i) = shift + 1.0 / tri.eigenvalues()(col);
          report.vectors.col(i) = v.leftCols(steps) * tri.eigenvectors().col(col);
        }
        count_window(report);
        return report;
      }
      if (space_complete) break;
    }
  }

  throw numeric_error("eigenvalue iteration did not converge in " + std::to_string(steps) +
                      " steps (worst residual " + std::to_string(worst) + ")");
}

}  // namespace

SpectrumReport spectrum(const DiscreteOperator& op, int k, double tol_zero,
                        const SpectrumOptions& options) {
  validate_operator(op, k);
  const auto start = std::chrono::steady_clock::now();

  SpectrumOptions::Method method = options.method;
  if (method == SpectrumOptions::Method::automatic) {
    const auto n = static_cast<long>(op.size);
    method = (n <= 4200 || 3 * k > n) ? SpectrumOptions::Method::dense
                                      : SpectrumOptions::Method::lanczos;
  }

  SpectrumReport report = method == SpectrumOptions::Method::dense
                              ? dense_spectrum(op, k, tol_zero)
                              : lanczos_spectrum(op, k, tol_zero, options);
  const auto stop = std::chrono::steady_clock::now();
  report.runtime_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start)
          .count();
  return report;
}

double suggested_tol_zero(const DiscreteOperator& op, double h) {
  const double pot =
      op.potential.size() > 0 ? op.potential.cwiseAbs().maxCoeff() : 0.0;
  return 50.0 * h * h * std::max(1.0, pot / 4.0);
}

CountingLemmaReport counting_lemma_check(const Mat& q_gram, const Mat& l_gram,
                                         const SpectrumReport& report, double c, int dim_g,
                                         int dim_s_null, double tol) {
  if (q_gram.rows() != q_gram.cols() || l_gram.rows() != q_gram.rows() ||
      l_gram.cols() != q_gram.cols()) {
    throw input_error("trace-form matrices must be square and equal-sized");
  }
  if (dim_g < 1) throw input_error("symmetry dimension must be positive");
  const int s = static_cast<int>(q_gram.rows());
  if (dim_s_null < 0 || dim_s_null > s) {
    throw input_error("null subspace dimension must lie between 0 and the family size");
  }

  CountingLemmaReport out;
  out.dim_s = s;
  out.dim_g = dim_g;
  out.dim_s_null = dim_s_null;
  out.c = c;
  out.strict_bound = static_cast<double>(s) / dim_g;
  out.weak_bound = static_cast<double>(s - dim_s_null) / dim_g;

  for (long i = 0; i < report.eigenvalues.size(); ++i) {
    if (report.eigenvalues(i) < c - report.tol_zero) ++out.eigenvalues_below_c;
  }

  if (s == 0) {
    out.hypothesis_strict = true;
    out.hypothesis_weak = true;
    out.strict_bound_met = true;
    out.weak_bound_met = true;
    return out;
  }

  Mat a = q_gram - c * l_gram;
  a = 0.5 * (a + a.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Mat> eig(a);
  out.worst_margin = eig.eigenvalues().maxCoeff();
  const double scale = std::max({1.0, q_gram.cwiseAbs().maxCoeff(),
                                 std::abs(c) * l_gram.cwiseAbs().maxCoeff()});
  out.hypothesis_strict = out.worst_margin < -tol * scale;
  out.hypothesis_weak = out.worst_margin <= tol * scale;
  out.strict_bound_met = out.eigenvalues_below_c + 1e-12 >= out.strict_bound;
  out.weak_bound_met = report.index + 1e-12 >= out.weak_bound;
  return out;
}

}  // namespace minlab
