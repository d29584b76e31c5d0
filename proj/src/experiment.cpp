#include "minlab/experiment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <sstream>
#include <utility>

#include "minlab/berger.hpp"
#include "minlab/discrete_operator.hpp"
#include "minlab/expression.hpp"
#include "minlab/hodge.hpp"
#include "minlab/immersion.hpp"
#include "minlab/simdiag.hpp"
#include "minlab/space_model.hpp"
#include "minlab/spectrum.hpp"
#include "minlab/trace_lab.hpp"
#include "minlab/version.hpp"

namespace minlab {

namespace {

// ---------------------------------------------------------------------------
// Small shared helpers.

std::shared_ptr<const SpaceModel> shared_model(const std::string& name) {
  return std::shared_ptr<const SpaceModel>(make_model(name));
}

void add_check(std::vector<IdentityCheck>* ids, std::string name, double value, double tol) {
  IdentityCheck c;
  c.name = std::move(name);
  c.value = value;
  c.tolerance = tol;
  c.pass = value <= tol;
  ids->push_back(std::move(c));
}

std::string grid_tag(int n) { return "n" + std::to_string(n); }

// Trapezoid quadrature of a nodal field against the area element; exact for
// smooth periodic integrands up to spectral accuracy.
double integrate_nodal(const ParametricImmersion& imm, const Vec& field) {
  const PeriodicGrid& g = imm.grid();
  const double cell = g.h(0) * (g.dim() == 2 ? g.h(1) : 1.0);
  return (field.array() * imm.area_element().array()).sum() * cell;
}

Vec omega_norm2_field(const DiscreteOneForm& omega) {
  return (omega.components.array() * omega.sharp.array()).rowwise().sum().matrix();
}

double abs_diag_sum(const Mat& m) { return m.diagonal().cwiseAbs().sum(); }

// Coarse-grid budget for identities whose contract tolerance is pinned at the
// reference grid 64^2: slack at the scheme's observed convergence order below
// it, the pinned value at and above it.
double scaled_tol(double base, int n, int reference = 64, int order = 2) {
  const double f = static_cast<double>(reference) / n;
  return base * std::max(1.0, std::pow(f, order));
}

JsonValue spectrum_json(const SpectrumReport& rep, int grid) {
  JsonValue j = JsonValue::object();
  j.set("grid", grid);
  j.set("eigenvalues", JsonValue::from_vector(rep.eigenvalues));
  j.set("index", rep.index);
  j.set("nullity", rep.nullity);
  j.set("tol_zero", rep.tol_zero);
  j.set("method", rep.method);
  j.set("iterations", rep.iterations);
  return j;
}

JsonValue identity_json(const IdentityCheck& c) {
  JsonValue j = JsonValue::object();
  j.set("name", c.name);
  j.set("value", c.value);
  j.set("tolerance", c.tolerance);
  j.set("pass", c.pass);
  return j;
}

JsonValue config_json(const ExperimentConfig& cfg) {
  JsonValue j = JsonValue::object();
  j.set("name", cfg.name);
  j.set("model", cfg.model);
  j.set("immersion", cfg.immersion);
  JsonValue res = JsonValue::array();
  for (int n : cfg.resolutions) res.push(n);
  j.set("resolutions", std::move(res));
  j.set("tol_zero", cfg.tol_zero);
  j.set("quadrature", cfg.quadrature);
  j.set("output_dir", cfg.output_dir);
  j.set("seed", static_cast<std::int64_t>(cfg.seed));
  j.set("threads", cfg.threads);
  j.set("equator_n", cfg.equator_n);
  j.set("r_min", cfg.r_min);
  j.set("r_max", cfg.r_max);
  j.set("scan_count", cfg.scan_count);
  j.set("scan_samples", cfg.scan_samples);
  j.set("simdiag_example", cfg.simdiag_example);
  j.set("pair_file", cfg.pair_file);
  j.set("convergence_verb", cfg.convergence_verb);
  return j;
}

// Immersed-surface stage shared by the trace verbs: geometry, extrinsic data,
// and the unit-period harmonic forms at one resolution.
struct SurfaceStage {
  ParametricImmersion imm;
  ExtrinsicData ext;
  HarmonicBasisReport harmonic;
};

SurfaceStage surface_stage(const ExperimentConfig& cfg, int n) {
  auto mdl = shared_model(cfg.model);
  if (cfg.immersion == "clifford") {
    SurfaceStage s{ParametricImmersion::clifford_torus(mdl, n, n), {}, {}};
    s.ext = extrinsic_data(s.imm);
    s.harmonic = harmonic_basis(s.imm);
    return s;
  }
  if (cfg.immersion.rfind("equator:n=", 0) == 0) {
    const std::string tail = cfg.immersion.substr(10);
    if (tail == "2") {
      SurfaceStage s{ParametricImmersion::equator_circle(mdl, n), {}, {}};
      s.ext = extrinsic_data(s.imm);
      s.harmonic = harmonic_basis(s.imm);
      return s;
    }
    throw input_error("immersion '" + cfg.immersion +
                      "' has no periodic chart; only the equator-sn experiment runs it");
  }
  // Anything else names a closed-form immersion recipe file.
  ImmersionRecipe recipe = parse_immersion_file(cfg.immersion);
  const int d = mdl->dim() - 1;
  SurfaceStage s{d == 1 ? ParametricImmersion::from_recipe(mdl, recipe, n)
                        : ParametricImmersion::from_recipe(mdl, recipe, n, n),
                 {},
                 {}};
  s.ext = extrinsic_data(s.imm);
  s.harmonic = harmonic_basis(s.imm);
  return s;
}

// ---------------------------------------------------------------------------
// clifford-s3: spectrum, trace-zero ratios, and the counting bound at each
// resolution of the flat minimal torus.

JsonValue run_clifford_s3(const ExperimentConfig& cfg, std::vector<IdentityCheck>* ids,
                          std::vector<std::pair<int, double>>* metrics) {
  JsonValue stages = JsonValue::array();
  const std::array<double, 5> oracle = {-4.0, -2.0, -2.0, -2.0, -2.0};
  for (int n : cfg.resolutions) {
    SurfaceStage s = surface_stage(cfg, n);
    DiscreteOperator op = jacobi_operator(s.imm, s.ext);
    SpectrumReport rep = spectrum(op, 12, cfg.tol_zero);

    add_check(ids, "index_" + grid_tag(n), std::abs(rep.index - 5), 0.0);
    add_check(ids, "nullity_" + grid_tag(n), std::abs(rep.nullity - 4), 0.0);
    double eig_err = 0.0;
    for (int i = 0; i < 5; ++i)
      eig_err = std::max(eig_err, std::abs(rep.eigenvalues(i) - oracle[static_cast<std::size_t>(
                                                                    i)]) /
                                      std::abs(oracle[static_cast<std::size_t>(i)]));
    add_check(ids, "eigenvalue_error_" + grid_tag(n), eig_err, 0.02);
    if (metrics) metrics->emplace_back(n, eig_err);

    JsonValue stage = JsonValue::object();
    stage.set("spectrum", spectrum_json(rep, n));

    JsonValue tz = JsonValue::array();
    for (std::size_t k = 0; k < s.harmonic.forms.size(); ++k) {
      QuadraticFormReport q = assemble_quadratic_form(TestFamily::phi_wedge, s.imm, s.ext,
                                                      s.harmonic.forms[k]);
      const double ratio = std::abs(q.trace_q) / abs_diag_sum(q.gram_q);
      add_check(ids, "trace_zero_ratio_w" + std::to_string(k + 1) + "_" + grid_tag(n), ratio,
                scaled_tol(1e-3, n, 64, 4));
      JsonValue row = JsonValue::object();
      row.set("omega", static_cast<int>(k + 1));
      row.set("trace_q", q.trace_q);
      row.set("diag_abs_sum", abs_diag_sum(q.gram_q));
      row.set("ratio", ratio);
      tz.push(std::move(row));
    }
    stage.set("trace_zero", std::move(tz));

    const RationalConstant c = index_bound_constant(6, 3);
    const bool bound = bound_check(rep.index, s.harmonic.betti1, c);
    add_check(ids, "index_bound_" + grid_tag(n), bound ? 0.0 : 1.0, 0.0);
    JsonValue bj = JsonValue::object();
    bj.set("constant_num", static_cast<std::int64_t>(c.num));
    bj.set("constant_den", static_cast<std::int64_t>(c.den));
    bj.set("betti1", s.harmonic.betti1);
    bj.set("index", rep.index);
    bj.set("holds", bound);
    stage.set("bound", std::move(bj));
    stages.push(std::move(stage));
  }
  JsonValue out = JsonValue::object();
  out.set("stages", std::move(stages));
  return out;
}

// ---------------------------------------------------------------------------
// equator-sn: totally geodesic equator spectra; n = 3 runs the glued
// two-chart sphere, n = 2 the periodic great circle.

JsonValue run_equator(const ExperimentConfig& cfg, std::vector<IdentityCheck>* ids,
                      std::vector<std::pair<int, double>>* metrics) {
  JsonValue stages = JsonValue::array();
  for (int n : cfg.resolutions) {
    JsonValue stage = JsonValue::object();
    if (cfg.equator_n == 3) {
      auto imm = TwoChartSphereImmersion::equator_in_s3(shared_model("s3"));
      const int lattice = n % 2 == 1 ? n : n + 1;  // chart lattices are odd
      TwoChartGrid grid = two_chart_grid(imm, lattice);
      DiscreteOperator op = two_chart_jacobi(imm, grid);
      const double tol_zero = suggested_tol_zero(op, grid.spacing);
      SpectrumReport rep = spectrum(op, 9, tol_zero);

      add_check(ids, "index_" + grid_tag(n), std::abs(rep.index - 1), 0.0);
      add_check(ids, "nullity_" + grid_tag(n), std::abs(rep.nullity - 3), 0.0);
      // Nonzero analytic values among the lowest nine: -2, then five at 4.
      double eig_err = std::abs(rep.eigenvalues(0) + 2.0) / 2.0;
      for (int i = 4; i < 9; ++i)
        eig_err = std::max(eig_err, std::abs(rep.eigenvalues(i) - 4.0) / 4.0);
      // The chart-glued discretization carries a larger constant than the
      // periodic schemes; 2% is met from lattice 97 upward.
      add_check(ids, "eigenvalue_error_" + grid_tag(n), eig_err,
                scaled_tol(0.02, lattice, 96));
      if (metrics) metrics->emplace_back(n, eig_err);
      stage.set("lattice", lattice);
      stage.set("spectrum", spectrum_json(rep, lattice));
    } else {
      auto imm = ParametricImmersion::equator_circle(shared_model("s2"), n);
      auto ext = extrinsic_data(imm);
      DiscreteOperator op = jacobi_operator(imm, ext);
      const double tol_zero = suggested_tol_zero(op, imm.grid().h(0));
      SpectrumReport rep = spectrum(op, 5, tol_zero);

      add_check(ids, "index_" + grid_tag(n), std::abs(rep.index - 1), 0.0);
      add_check(ids, "nullity_" + grid_tag(n), std::abs(rep.nullity - 2), 0.0);
      double eig_err = std::abs(rep.eigenvalues(0) + 1.0);
      for (int i = 3; i < 5; ++i)
        eig_err = std::max(eig_err, std::abs(rep.eigenvalues(i) - 3.0) / 3.0);
      add_check(ids, "eigenvalue_error_" + grid_tag(n), eig_err, scaled_tol(0.02, n));
      if (metrics) metrics->emplace_back(n, eig_err);
      stage.set("lattice", n);
      stage.set("spectrum", spectrum_json(rep, n));
    }
    stages.push(std::move(stage));
  }
  JsonValue out = JsonValue::object();
  out.set("stages", std::move(stages));
  return out;
}

// ---------------------------------------------------------------------------
// trace-zero: the wedge-family trace vanishes for harmonic one-forms; the
// ratio against the absolute diagonal mass must shrink at order >= 1.8.

JsonValue run_trace_zero(const ExperimentConfig& cfg, std::vector<IdentityCheck>* ids,
                         std::vector<std::pair<int, double>>* metrics) {
  JsonValue rows = JsonValue::array();
  std::vector<std::vector<double>> ratios;  // per omega, per resolution
  for (int n : cfg.resolutions) {
    SurfaceStage s = surface_stage(cfg, n);
    double worst = 0.0;
    for (std::size_t k = 0; k < s.harmonic.forms.size(); ++k) {
      QuadraticFormReport q = assemble_quadratic_form(TestFamily::phi_wedge, s.imm, s.ext,
                                                      s.harmonic.forms[k]);
      const double ratio = std::abs(q.trace_q) / abs_diag_sum(q.gram_q);
      worst = std::max(worst, ratio);
      if (ratios.size() <= k) ratios.emplace_back();
      ratios[k].push_back(ratio);
      add_check(ids, "trace_zero_ratio_w" + std::to_string(k + 1) + "_" + grid_tag(n), ratio,
                scaled_tol(1e-3, n, 64, 4));
      JsonValue row = JsonValue::object();
      row.set("grid", n);
      row.set("omega", static_cast<int>(k + 1));
      row.set("trace_q", q.trace_q);
      row.set("diag_abs_sum", abs_diag_sum(q.gram_q));
      row.set("ratio", ratio);
      rows.push(std::move(row));
    }
    if (metrics) metrics->emplace_back(n, worst);
  }
  JsonValue orders = JsonValue::array();
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    for (std::size_t i = 0; i + 1 < ratios[k].size(); ++i) {
      const double n0 = cfg.resolutions[i];
      const double n1 = cfg.resolutions[i + 1];
      const double order = std::log(ratios[k][i] / ratios[k][i + 1]) / std::log(n1 / n0);
      JsonValue row = JsonValue::object();
      row.set("omega", static_cast<int>(k + 1));
      row.set("from", static_cast<int>(n0));
      row.set("to", static_cast<int>(n1));
      row.set("order", order);
      orders.push(std::move(row));
      add_check(ids,
                "trace_zero_order_shortfall_w" + std::to_string(k + 1) + "_" +
                    grid_tag(static_cast<int>(n1)),
                std::max(0.0, 1.8 - order), 0.0);
    }
  }
  JsonValue out = JsonValue::object();
  out.set("rows", std::move(rows));
  out.set("orders", std::move(orders));
  return out;
}

// ---------------------------------------------------------------------------
// trace-formula-1: the derivation-family trace against its closed-form
// integral, the bare Ricci integral, and the two surface reductions.

JsonValue run_trace_formula_one(const ExperimentConfig& cfg, std::vector<IdentityCheck>* ids,
                                std::vector<std::pair<int, double>>* metrics) {
  JsonValue rows = JsonValue::array();
  for (int n : cfg.resolutions) {
    SurfaceStage s = surface_stage(cfg, n);
    const Vec ric_nn = jacobi_potential(s.imm, s.ext) - s.ext.a_norm2;
    double worst = 0.0;
    for (std::size_t k = 0; k < s.harmonic.forms.size(); ++k) {
      const DiscreteOneForm& omega = s.harmonic.forms[k];
      QuadraticFormReport q =
          assemble_quadratic_form(TestFamily::psi_algebra, s.imm, s.ext, omega);
      TraceRhsOne rhs = rhs_trace_formula_one(s.imm, s.ext, omega);
      const Vec w2 = omega_norm2_field(omega);
      const double ricci_integral =
          -integrate_nodal(s.imm, (ric_nn.array() * w2.array()).matrix());
      const std::string tag = "_w" + std::to_string(k + 1) + "_" + grid_tag(n);

      const double closed_rel = std::abs(q.trace_q - rhs.general) / std::abs(rhs.general);
      worst = std::max(worst, std::abs(q.trace_q - rhs.general));
      add_check(ids, "closed_form_rel" + tag, closed_rel, 0.01);
      add_check(ids, "ricci_identity_rel" + tag,
                std::abs(q.trace_q - ricci_integral) / std::abs(ricci_integral), 0.01);
      if (rhs.surface_forms) {
        const double gap = std::max(std::abs(rhs.general - rhs.surface_normal),
                                    std::abs(rhs.surface_normal - rhs.surface_scalar));
        add_check(ids, "surface_forms_gap" + tag, gap, 1e-6);
      }

      JsonValue row = JsonValue::object();
      row.set("grid", n);
      row.set("omega", static_cast<int>(k + 1));
      row.set("trace_q", q.trace_q);
      row.set("rhs_general", rhs.general);
      row.set("ricci_integral", ricci_integral);
      if (rhs.surface_forms) {
        row.set("rhs_surface_normal", rhs.surface_normal);
        row.set("rhs_surface_scalar", rhs.surface_scalar);
      }
      row.set("residual", q.residual);
      rows.push(std::move(row));
    }
    if (metrics) metrics->emplace_back(n, worst);
  }
  JsonValue out = JsonValue::object();
  out.set("rows", std::move(rows));
  return out;
}

// ---------------------------------------------------------------------------
// trace-formula-2: the wedge-family trace against the frame-assembled rhs and
// the Gauss-substituted rhs.

JsonValue run_trace_formula_two(const ExperimentConfig& cfg, std::vector<IdentityCheck>* ids,
                                std::vector<std::pair<int, double>>* metrics) {
  JsonValue rows = JsonValue::array();
  for (int n : cfg.resolutions) {
    SurfaceStage s = surface_stage(cfg, n);
    double worst = 0.0;
    for (std::size_t k = 0; k < s.harmonic.forms.size(); ++k) {
      const DiscreteOneForm& omega = s.harmonic.forms[k];
      QuadraticFormReport q =
          assemble_quadratic_form(TestFamily::phi_wedge, s.imm, s.ext, omega);
      TraceRhsTwo rhs = rhs_trace_formula_two(s.imm, s.ext, omega);
      const std::string tag = "_w" + std::to_string(k + 1) + "_" + grid_tag(n);

      // Relative to the diagonal mass: the closed form vanishes identically
      // on a flat minimal torus, so a plain relative error is ill-posed.
      const double rel = std::abs(q.trace_q - rhs.frame) /
                         std::max(std::abs(rhs.frame), abs_diag_sum(q.gram_q));
      worst = std::max(worst, std::abs(q.trace_q - rhs.frame));
      add_check(ids, "closed_form_rel" + tag, rel, 0.01);
      add_check(ids, "frame_gauss_gap" + tag, std::abs(rhs.frame - rhs.gauss), 1e-6);

      JsonValue row = JsonValue::object();
      row.set("grid", n);
      row.set("omega", static_cast<int>(k + 1));
      row.set("trace_q", q.trace_q);
      row.set("rhs_frame", rhs.frame);
      row.set("rhs_gauss", rhs.gauss);
      row.set("diag_abs_sum", abs_diag_sum(q.gram_q));
      rows.push(std::move(row));
    }
    if (metrics) metrics->emplace_back(n, worst);
  }
  JsonValue out = JsonValue::object();
  out.set("rows", std::move(rows));
  return out;
}

// ---------------------------------------------------------------------------
// berger-scan: sampled supremum of the stability integrand over geodesic
// spheres in the projective plane, against the closed-form bound.

JsonValue run_berger_scan(const ExperimentConfig& cfg, std::vector<IdentityCheck>* ids,
                          std::vector<std::pair<int, double>>*) {
  std::vector<BergerScanRow> rows =
      berger_scan(cfg.r_min, cfg.r_max, cfg.scan_count, cfg.scan_samples, cfg.seed);
  JsonValue jrows = JsonValue::array();
  double worst_below = -1e300;
  bool any_below = false;
  for (const BergerScanRow& r : rows) {
    JsonValue row = JsonValue::object();
    row.set("r", r.r);
    row.set("tan_r", r.tan_r);
    row.set("bound", r.bound);
    row.set("sampled_sup", r.sampled_sup);
    row.set("sampled_negative", r.sampled_negative);
    jrows.push(std::move(row));
    if (r.tan_r <= 1.6) {
      any_below = true;
      worst_below = std::max(worst_below, r.sampled_sup);
    }
  }
  if (any_below) add_check(ids, "sampled_sup_negative_below_tan_1p6", worst_below, 0.0);

  JsonValue gauss = JsonValue::array();
  double worst_gauss = 0.0;
  for (double r : {cfg.r_min, 0.5 * (cfg.r_min + cfg.r_max), cfg.r_max}) {
    const double res = berger_gauss_residual(r);
    worst_gauss = std::max(worst_gauss, res);
    JsonValue row = JsonValue::object();
    row.set("r", r);
    row.set("residual", res);
    gauss.push(std::move(row));
  }
  add_check(ids, "gauss_equation_residual", worst_gauss, 1e-10);

  JsonValue out = JsonValue::object();
  out.set("rows", std::move(jrows));
  out.set("gauss_residuals", std::move(gauss));
  return out;
}

// ---------------------------------------------------------------------------
// berger-threshold: closed-form sign change of the sup bound and the sampled
// bracket around it.

JsonValue run_berger_threshold(const ExperimentConfig& cfg, std::vector<IdentityCheck>* ids,
                               std::vector<std::pair<int, double>>*) {
  const double r_star = berger_threshold();
  const double tan_star = std::tan(r_star);
  const double tan_exact = std::sqrt(1.0 + std::sqrt(3.0));
  add_check(ids, "closed_form_tan_threshold", std::abs(tan_star - tan_exact), 1e-9);

  // Sweep tan r over [1.60, 1.70] and bracket the sampled sign change.
  const int count = 21;
  JsonValue jrows = JsonValue::array();
  double prev_tan = 0.0, prev_sup = -1.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  bool found = false;
  for (int i = 0; i < count; ++i) {
    const double t = 1.60 + 0.10 * i / (count - 1);
    const BergerData d = make_berger(std::atan(t));
    const BergerSample s =
        sample_beta_sup(d, cfg.scan_samples, cfg.seed + static_cast<std::uint64_t>(i));
    JsonValue row = JsonValue::object();
    row.set("tan_r", t);
    row.set("bound", beta_sup_bound(d.r));
    row.set("sampled_sup", s.max_beta);
    jrows.push(std::move(row));
    if (!found && i > 0 && prev_sup < 0.0 && s.max_beta >= 0.0) {
      bracket_lo = prev_tan;
      bracket_hi = t;
      found = true;
    }
    prev_tan = t;
    prev_sup = s.max_beta;
  }
  add_check(ids, "sampled_sign_change_found", found ? 0.0 : 1.0, 0.0);
  if (found) {
    const double mid = 0.5 * (bracket_lo + bracket_hi);
    add_check(ids, "sampled_sign_change_window", std::abs(mid - tan_exact), 0.01);
  }

  JsonValue out = JsonValue::object();
  JsonValue closed = JsonValue::object();
  closed.set("r", r_star);
  closed.set("tan_r", tan_star);
  closed.set("tan_exact", tan_exact);
  out.set("closed_form", std::move(closed));
  out.set("scan", std::move(jrows));
  if (found) {
    JsonValue bracket = JsonValue::object();
    bracket.set("tan_lo", bracket_lo);
    bracket.set("tan_hi", bracket_hi);
    out.set("bracket", std::move(bracket));
  }
  return out;
}

// ---------------------------------------------------------------------------
// euclid-compare: the flat-embedding wedge trace against the intrinsic one
// plus the closed-form correction.

JsonValue run_euclid_compare(const ExperimentConfig& cfg, std::vector<IdentityCheck>* ids,
                             std::vector<std::pair<int, double>>* metrics) {
  JsonValue rows = JsonValue::array();
  for (int n : cfg.resolutions) {
    SurfaceStage s = surface_stage(cfg, n);
    double worst = 0.0;
    for (std::size_t k = 0; k < s.harmonic.forms.size(); ++k) {
      EuclidTraceReport er = euclid_trace(s.imm, s.ext, s.harmonic.forms[k]);
      const std::string tag = "_w" + std::to_string(k + 1) + "_" + grid_tag(n);
      const double beta_ref = beta_euclid_sphere(s.imm.ambient().dim(), 1.0);
      add_check(ids, "beta_closed_form" + tag, std::abs(er.beta_closed_form - beta_ref),
                1e-12);
      const double beta_assembled =
          (er.euclid.trace_q - er.algebra.trace_q) / er.omega_norm2;
      add_check(ids, "beta_assembled_rel" + tag,
                std::abs(beta_assembled - er.beta_closed_form) / std::abs(er.beta_closed_form),
                0.01);
      add_check(ids, "comparison_rel" + tag,
                er.comparison_residual / std::max(1.0, std::abs(er.comparison_rhs)), 0.01);
      worst = std::max(worst, er.comparison_residual);

      JsonValue row = JsonValue::object();
      row.set("grid", n);
      row.set("omega", static_cast<int>(k + 1));
      row.set("trace_euclid", er.euclid.trace_q);
      row.set("trace_algebra", er.algebra.trace_q);
      row.set("gauss_form", er.gauss_form);
      row.set("beta_closed_form", er.beta_closed_form);
      row.set("beta_assembled", beta_assembled);
      row.set("omega_norm2", er.omega_norm2);
      row.set("comparison_rhs", er.comparison_rhs);
      row.set("comparison_residual", er.comparison_residual);
      rows.push(std::move(row));
    }
    if (metrics) metrics->emplace_back(n, worst);
  }
  JsonValue out = JsonValue::object();
  out.set("rows", std::move(rows));
  return out;
}

// ---------------------------------------------------------------------------
// simdiag: smooth simultaneous diagonalization examples.

Mat rot2_mat(double t) {
  Mat r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

CommutingPair custom_pair_from_file(const std::string& path, int lattice) {
  int dim = 2;
  double extent = 1.0;
  std::array<std::array<Expression, 3>, 3> a_expr, b_expr;
  bool any_b = false;
  for (const auto& [key, value] : parse_config_entries(path)) {
    if (key == "dim") {
      dim = std::stoi(value);
      if (dim < 1 || dim > 3) throw input_error("pair file: dim must be 1, 2, or 3");
    } else if (key == "extent") {
      extent = std::stod(value);
    } else if (key.size() == 3 && (key[0] == 'a' || key[0] == 'b') &&
               std::isdigit(static_cast<unsigned char>(key[1])) &&
               std::isdigit(static_cast<unsigned char>(key[2]))) {
      const int i = key[1] - '1';
      const int j = key[2] - '1';
      if (i < 0 || i > 2 || j < 0 || j > 2 || j < i)
        throw input_error("pair file: entry keys are a11..a33 / b11..b33 with row <= column");
      Expression e = Expression::parse(value);
      if (key[0] == 'a') {
        a_expr[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = e;
      } else {
        b_expr[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = e;
        any_b = true;
      }
    } else {
      throw input_error("pair file: unknown key '" + key + "'");
    }
  }
  auto eval = [dim](const std::array<std::array<Expression, 3>, 3>& expr, double u, double v) {
    Mat m = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) {
        const auto& e = expr[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        const double x = e.empty() ? 0.0 : e.value(u, v);
        m(i, j) = x;
        m(j, i) = x;
      }
    }
    return m;
  };
  auto alpha = [&, eval](double u, double v) { return eval(a_expr, u, v); };
  auto beta = [&, eval, any_b](double u, double v) {
    return eval(any_b ? b_expr : a_expr, u, v);
  };
  return field_pair(lattice, lattice, extent, dim, alpha, beta);
}

JsonValue run_simdiag(const ExperimentConfig& cfg, std::vector<IdentityCheck>* ids,
                      std::vector<std::pair<int, double>>*) {
  const int n = cfg.resolutions.front();
  JsonValue out = JsonValue::object();
  out.set("example", cfg.simdiag_example);

  CommutingPair pair;
  if (cfg.simdiag_example == "clifford-shape") {
    auto s3 = shared_model("s3");
    auto imm = ParametricImmersion::clifford_torus(s3, n, n);
    auto ext = extrinsic_data(imm);
    const int win = std::max(8, n / 4);
    pair = shape_operator_pair(imm, ext, n / 8, n / 8, win, win);
    out.set("lattice", win);
  } else if (cfg.simdiag_example == "polynomial-pair") {
    const int lattice = n % 2 == 0 ? n : n + 1;  // keeps the crossing off-node
    auto alpha = [](double u, double v) {
      Mat d = Mat::Zero(2, 2);
      d(0, 0) = u;
      d(1, 1) = -u;
      Mat r = rot2_mat(0.3 + 0.2 * u + 0.1 * v);
      return Mat(r * d * r.transpose());
    };
    auto beta = [&](double u, double v) {
      Mat a = alpha(u, v);
      return Mat(a * a + a);
    };
    pair = field_pair(lattice, lattice, 1.0, 2, alpha, beta);
    out.set("lattice", lattice);
  } else {
    pair = custom_pair_from_file(cfg.pair_file, n);
    out.set("lattice", n);
  }

  EigenvalueFields ev = sorted_eigenvalue_fields(pair);
  SmoothFrameResult res = simultaneous_diagonalize(pair);
  const double naive = naive_frame_score(pair);

  add_check(ids, "commutator", pair.max_commutator(), 1e-10);
  add_check(ids, "orthonormality", res.ortho_residual, 1e-10);
  add_check(ids, "eigen_residual", res.eigen_residual, 1e-8);
  if (cfg.simdiag_example == "clifford-shape") {
    const double dev = std::max((ev.values.col(0).array() + 1.0).abs().maxCoeff(),
                                (ev.values.col(1).array() - 1.0).abs().maxCoeff());
    add_check(ids, "shape_eigenvalues", dev, 1e-10);
    add_check(ids, "smoothness", res.smoothness_score, 1e-10);
  } else if (cfg.simdiag_example == "polynomial-pair") {
    add_check(ids, "smoothness_linear_in_h", res.smoothness_score, 0.25 * pair.spacing);
    add_check(ids, "naive_frame_jump", std::max(0.0, 1.0 - naive), 0.0);
  }

  JsonValue scores = JsonValue::object();
  scores.set("smoothness", res.smoothness_score);
  scores.set("naive", naive);
  scores.set("ortho_residual", res.ortho_residual);
  scores.set("eigen_residual", res.eigen_residual);
  scores.set("sorted_max_jump", ev.max_adjacent_jump);
  out.set("scores", std::move(scores));

  JsonValue mults = JsonValue::array();
  for (int m : res.multiplicities) mults.push(m);
  out.set("multiplicities", std::move(mults));
  out.set("spacing", pair.spacing);
  out.set("kappa_a", JsonValue::from_matrix(res.kappa_a));
  out.set("kappa_b", JsonValue::from_matrix(res.kappa_b));
  JsonValue frames = JsonValue::array();
  for (const Mat& f : res.frame) frames.push(JsonValue::from_matrix(f));
  out.set("frames", std::move(frames));
  return out;
}

// ---------------------------------------------------------------------------
// bound-check: exact counting constants and the index inequalities on the
// flat minimal torus.

JsonValue run_bound_check(const ExperimentConfig& cfg, std::vector<IdentityCheck>* ids,
                          std::vector<std::pair<int, double>>*) {
  const RationalConstant c63 = index_bound_constant(6, 3);
  const RationalConstant c84 = index_bound_constant(8, 4);
  const RationalConstant a6 = affine_bound_constant(6);
  add_check(ids, "constant_6_3", c63.num == 1 && c63.den == 18 ? 0.0 : 1.0, 0.0);
  add_check(ids, "constant_8_4", c84.num == 1 && c84.den == 33 ? 0.0 : 1.0, 0.0);
  add_check(ids, "affine_constant_6", a6.num == 1 && a6.den == 15 ? 0.0 : 1.0, 0.0);

  const int n = cfg.resolutions.front();
  SurfaceStage s = surface_stage(cfg, n);
  DiscreteOperator op = jacobi_operator(s.imm, s.ext);
  SpectrumReport rep = spectrum(op, 12, cfg.tol_zero);
  const bool index_bound = bound_check(rep.index, s.harmonic.betti1, c63);
  const bool affine_bound = bound_check(rep.index + rep.nullity, s.harmonic.betti1, a6);
  add_check(ids, "index_bound_holds", index_bound ? 0.0 : 1.0, 0.0);
  add_check(ids, "affine_bound_holds", affine_bound ? 0.0 : 1.0, 0.0);

  JsonValue constants = JsonValue::array();
  for (const auto& [label, c] :
       {std::pair<const char*, const RationalConstant&>{"C(6,3)", c63},
        std::pair<const char*, const RationalConstant&>{"C(8,4)", c84},
        std::pair<const char*, const RationalConstant&>{"affine(6)", a6}}) {
    JsonValue row = JsonValue::object();
    row.set("label", label);
    row.set("num", static_cast<std::int64_t>(c.num));
    row.set("den", static_cast<std::int64_t>(c.den));
    row.set("value", c.value());
    constants.push(std::move(row));
  }
  JsonValue out = JsonValue::object();
  out.set("constants", std::move(constants));
  out.set("spectrum", spectrum_json(rep, n));
  JsonValue bounds = JsonValue::object();
  bounds.set("betti1", s.harmonic.betti1);
  bounds.set("index_bound_holds", index_bound);
  bounds.set("affine_bound_holds", affine_bound);
  out.set("bounds", std::move(bounds));
  return out;
}

// ---------------------------------------------------------------------------
// convergence: reruns a verb across the resolution list and reports the
// observed order of its primary residual.

using VerbRunner = JsonValue (*)(const ExperimentConfig&, std::vector<IdentityCheck>*,
                                 std::vector<std::pair<int, double>>*);

VerbRunner metric_runner(const std::string& verb) {
  if (verb == "clifford-s3") return run_clifford_s3;
  if (verb == "equator-sn") return run_equator;
  if (verb == "trace-zero") return run_trace_zero;
  if (verb == "trace-formula-1") return run_trace_formula_one;
  if (verb == "trace-formula-2") return run_trace_formula_two;
  if (verb == "euclid-compare") return run_euclid_compare;
  return nullptr;
}

JsonValue run_convergence(const ExperimentConfig& cfg, std::vector<IdentityCheck>* ids,
                          std::vector<std::pair<int, double>>*) {
  VerbRunner runner = metric_runner(cfg.convergence_verb);
  std::vector<IdentityCheck> scratch;  // sub-verb identities are not asserted here
  std::vector<std::pair<int, double>> metrics;
  JsonValue sub = runner(cfg, &scratch, &metrics);

  JsonValue rows = JsonValue::array();
  for (const auto& [n, value] : metrics) {
    JsonValue row = JsonValue::object();
    row.set("grid", n);
    row.set("residual", value);
    rows.push(std::move(row));
  }
  JsonValue orders = JsonValue::array();
  double min_order = 1e300;
  for (std::size_t i = 0; i + 1 < metrics.size(); ++i) {
    const double order = std::log(metrics[i].second / metrics[i + 1].second) /
                         std::log(static_cast<double>(metrics[i + 1].first) /
                                  static_cast<double>(metrics[i].first));
    min_order = std::min(min_order, order);
    JsonValue row = JsonValue::object();
    row.set("from", metrics[i].first);
    row.set("to", metrics[i + 1].first);
    row.set("order", order);
    orders.push(std::move(row));
  }
  if (cfg.convergence_verb == "trace-zero" && metrics.size() >= 2) {
    add_check(ids, "order_shortfall", std::max(0.0, 1.8 - min_order), 0.0);
  }

  JsonValue out = JsonValue::object();
  out.set("verb", cfg.convergence_verb);
  out.set("rows", std::move(rows));
  out.set("orders", std::move(orders));
  out.set("details", std::move(sub));
  return out;
}

// ---------------------------------------------------------------------------
// Config plumbing.

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return key;
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw input_error("config: key '" + key + "' needs an integer, got '" + value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw input_error("config: key '" + key + "' needs a number, got '" + value + "'");
  }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    std::istringstream words(item);
    std::string word;
    while (words >> word) out.push_back(parse_int(key, word));
  }
  return out;
}

}  // namespace

std::vector<std::string> experiment_names() {
  return {"clifford-s3",     "equator-sn",      "trace-zero", "trace-formula-1",
          "trace-formula-2", "berger-scan",     "berger-threshold",
          "euclid-compare",  "simdiag",         "bound-check", "convergence"};
}

void validate_config(const ExperimentConfig& cfg) {
  const auto names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.name) == names.end())
    throw input_error("unknown experiment '" + cfg.name + "'");
  if (cfg.resolutions.empty()) throw input_error("config: resolutions list is empty");
  for (int n : cfg.resolutions)
    if (n < 8) throw input_error("config: resolutions must be at least 8");
  if (!(cfg.tol_zero > 0.0)) throw input_error("config: tol_zero must be positive");
  if (!(cfg.quadrature > 0.0)) throw input_error("config: quadrature must be positive");
  if (cfg.threads < 0) throw input_error("config: threads must be nonnegative");
  if (cfg.name == "equator-sn" && cfg.equator_n != 2 && cfg.equator_n != 3)
    throw input_error("config: equator-sn supports n = 2 or n = 3");
  if (cfg.name == "berger-scan" || cfg.name == "berger-threshold") {
    if (!(cfg.r_min > 0.0) || !(cfg.r_max > cfg.r_min) || !(cfg.r_max < 0.5 * kPi))
      throw input_error("config: berger radii need 0 < r-min < r-max < pi/2");
    if (cfg.scan_count < 2) throw input_error("config: berger scan needs at least 2 radii");
    if (cfg.scan_samples < 1) throw input_error("config: berger samples must be positive");
  }
  if (cfg.name == "simdiag") {
    if (cfg.simdiag_example != "clifford-shape" && cfg.simdiag_example != "polynomial-pair" &&
        cfg.simdiag_example != "custom")
      throw input_error(
          "config: simdiag example must be clifford-shape, polynomial-pair, or custom");
    if (cfg.simdiag_example == "custom" && cfg.pair_file.empty())
      throw input_error("config: simdiag custom example needs a pair file");
  }
  if (cfg.name == "convergence") {
    if (metric_runner(cfg.convergence_verb) == nullptr)
      throw input_error("config: convergence cannot refine verb '" + cfg.convergence_verb +
                        "'");
    if (cfg.resolutions.size() < 2)
      throw input_error("config: convergence needs at least two resolutions");
  }
}

std::string ExperimentReport::first_failure() const {
  for (const IdentityCheck& c : identities)
    if (!c.pass) return c.name;
  return "";
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  ExperimentReport rep;
  rep.config = cfg;
  std::vector<std::pair<int, double>> metrics;
  if (cfg.name == "clifford-s3") {
    rep.results = run_clifford_s3(cfg, &rep.identities, &metrics);
  } else if (cfg.name == "equator-sn") {
    rep.results = run_equator(cfg, &rep.identities, &metrics);
  } else if (cfg.name == "trace-zero") {
    rep.results = run_trace_zero(cfg, &rep.identities, &metrics);
  } else if (cfg.name == "trace-formula-1") {
    rep.results = run_trace_formula_one(cfg, &rep.identities, &metrics);
  } else if (cfg.name == "trace-formula-2") {
    rep.results = run_trace_formula_two(cfg, &rep.identities, &metrics);
  } else if (cfg.name == "berger-scan") {
    rep.results = run_berger_scan(cfg, &rep.identities, &metrics);
  } else if (cfg.name == "berger-threshold") {
    rep.results = run_berger_threshold(cfg, &rep.identities, &metrics);
  } else if (cfg.name == "euclid-compare") {
    rep.results = run_euclid_compare(cfg, &rep.identities, &metrics);
  } else if (cfg.name == "simdiag") {
    rep.results = run_simdiag(cfg, &rep.identities, &metrics);
  } else if (cfg.name == "bound-check") {
    rep.results = run_bound_check(cfg, &rep.identities, &metrics);
  } else {
    rep.results = run_convergence(cfg, &rep.identities, &metrics);
  }
  rep.pass = true;
  for (const IdentityCheck& c : rep.identities) rep.pass = rep.pass && c.pass;
  return rep;
}

std::string report_json(const ExperimentReport& rep) {
  JsonValue root = JsonValue::object();
  root.set("version", kVersion);
  root.set("experiment", rep.config.name);
  root.set("config", config_json(rep.config));
  root.set("results", rep.results);
  JsonValue ids = JsonValue::array();
  for (const IdentityCheck& c : rep.identities) ids.push(identity_json(c));
  root.set("identities", std::move(ids));
  root.set("pass", rep.pass);
  return root.dump(2) + "\n";
}

std::string report_csv(const ExperimentReport& rep) {
  std::string out = "name,value,tolerance,pass\n";
  for (const IdentityCheck& c : rep.identities) {
    out += c.name;
    out += ',';
    out += format_double_17(c.value);
    out += ',';
    out += format_double_17(c.tolerance);
    out += ',';
    out += c.pass ? "pass" : "FAIL";
    out += '\n';
  }
  return out;
}

std::string report_text(const ExperimentReport& rep) {
  std::ostringstream os;
  os << "experiment " << rep.config.name << "  (version " << kVersion << ")\n";
  os << "model " << rep.config.model << ", immersion " << rep.config.immersion
     << ", resolutions";
  for (int n : rep.config.resolutions) os << ' ' << n;
  os << ", seed " << rep.config.seed << "\n\n";
  std::size_t width = 8;
  for (const IdentityCheck& c : rep.identities) width = std::max(width, c.name.size());
  os << std::left << std::setw(static_cast<int>(width + 2)) << "identity" << std::right
     << std::setw(14) << "value" << std::setw(14) << "tolerance" << "  status\n";
  for (const IdentityCheck& c : rep.identities) {
    std::ostringstream value, tol;
    value << std::setprecision(6) << std::scientific << c.value;
    tol << std::setprecision(2) << std::scientific << c.tolerance;
    os << std::left << std::setw(static_cast<int>(width + 2)) << c.name << std::right
       << std::setw(14) << value.str() << std::setw(14) << tol.str() << "  "
       << (c.pass ? "PASS" : "FAIL") << "\n";
  }
  os << "\noverall: " << (rep.pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::vector<std::string> write_report_files(const ExperimentReport& rep) {
  if (rep.config.output_dir.empty())
    throw input_error("write_report_files: output directory not set");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(rep.config.output_dir, ec);
  if (ec) throw input_error("cannot create output directory " + rep.config.output_dir);
  std::vector<std::string> paths;
  const std::array<std::pair<const char*, std::string>, 3> files = {
      std::pair<const char*, std::string>{".json", report_json(rep)},
      std::pair<const char*, std::string>{".csv", report_csv(rep)},
      std::pair<const char*, std::string>{".txt", report_text(rep)}};
  for (const auto& [suffix, content] : files) {
    fs::path p = fs::path(rep.config.output_dir) / (rep.config.name + suffix);
    std::ofstream out(p);
    if (!out) throw input_error("cannot write report file " + p.string());
    out << content;
    paths.push_back(p.string());
  }
  return paths;
}

std::vector<std::pair<std::string, std::string>> parse_config_entries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw input_error("config " + path + ": malformed section at line " +
                          std::to_string(lineno));
      section = normalize_key(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw input_error("config " + path + ": expected key = value at line " +
                        std::to_string(lineno));
    std::string key = normalize_key(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw input_error("config " + path + ": empty key at line " + std::to_string(lineno));
    if (!section.empty() && section != "experiment") key = section + "." + key;
    entries.emplace_back(std::move(key), value);
  }
  return entries;
}

void apply_config_entry(ExperimentConfig* cfg, const std::string& raw_key,
                        const std::string& value) {
  const std::string key = normalize_key(raw_key);
  if (key == "name") {
    cfg->name = value;
  } else if (key == "model") {
    cfg->model = value;
  } else if (key == "immersion") {
    cfg->immersion = value;
  } else if (key == "resolutions") {
    cfg->resolutions = parse_int_list(key, value);
  } else if (key == "tol-zero") {
    cfg->tol_zero = parse_real(key, value);
  } else if (key == "quadrature") {
    cfg->quadrature = parse_real(key, value);
  } else if (key == "output" || key == "output-dir") {
    cfg->output_dir = value;
  } else if (key == "seed") {
    cfg->seed = static_cast<std::uint64_t>(parse_real(key, value));
  } else if (key == "threads") {
    cfg->threads = parse_int(key, value);
  } else if (key == "equator.n") {
    cfg->equator_n = parse_int(key, value);
  } else if (key == "berger.r-min") {
    cfg->r_min = parse_real(key, value);
  } else if (key == "berger.r-max") {
    cfg->r_max = parse_real(key, value);
  } else if (key == "berger.count") {
    cfg->scan_count = parse_int(key, value);
  } else if (key == "berger.samples") {
    cfg->scan_samples = parse_int(key, value);
  } else if (key == "simdiag.example") {
    cfg->simdiag_example = value;
  } else if (key == "simdiag.pair-file") {
    cfg->pair_file = value;
  } else if (key == "convergence.verb") {
    cfg->convergence_verb = value;
  } else {
    throw input_error("config: unknown key '" + raw_key + "'");
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : parse_config_entries(path))
    apply_config_entry(&cfg, key, value);
  return cfg;
}

}  // namespace minlab
