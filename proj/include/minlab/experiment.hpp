#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "minlab/json_value.hpp"

namespace minlab {

// Named experiment pipelines tying the geometry, spectral, trace, and frame
// modules into reproducible report files. Reports are deterministic for a
// fixed config and thread count: no timestamps or runtimes are written, all
// floats carry 17 significant digits, and sampling is seeded.

struct ExperimentConfig {
  std::string name;  // experiment verb, see experiment_names()
  std::string model = "s3";
  std::string immersion = "clifford";
  std::vector<int> resolutions = {32, 48};
  double tol_zero = 0.05;    // zero-eigenvalue window for index/nullity splits
  double quadrature = 1e-8;  // internal consistency guard for assembled grams
  std::string output_dir;    // empty: no files written
  std::uint64_t seed = 20260821;
  int threads = 0;  // echoed in reports; 0 means the library default

  // Verb-specific options.
  int equator_n = 3;      // equator-sn: ambient sphere dimension (2 or 3)
  double r_min = 0.95;    // berger-scan: radius window (radians)
  double r_max = 1.05;
  int scan_count = 21;    // berger-scan: radii sampled in the window
  int scan_samples = 1000;  // berger-scan/threshold: directions sampled per radius
  std::string simdiag_example = "clifford-shape";  // or polynomial-pair, custom
  std::string pair_file;        // simdiag custom: expression file path
  std::string convergence_verb; // convergence: verb to refine
};

// All runnable experiment names, in display order.
std::vector<std::string> experiment_names();

// Throws input_error on violated invariants: unknown name, empty resolutions,
// any resolution < 8, non-positive tolerances, malformed verb options.
void validate_config(const ExperimentConfig& cfg);

// One asserted identity: pass iff value <= tolerance.
struct IdentityCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ExperimentReport {
  ExperimentConfig config;
  JsonValue results;  // verb-specific payload
  std::vector<IdentityCheck> identities;
  bool pass = true;

  // First failing identity name, empty when all pass.
  std::string first_failure() const;
};

// Runs the named pipeline. Throws input_error for config problems (usage) and
// propagates geometry/numeric errors from the modules.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Serializations: full JSON report (version, config echo, results,
// identities), CSV identity summary, and a human-readable text table.
std::string report_json(const ExperimentReport& rep);
std::string report_csv(const ExperimentReport& rep);
std::string report_text(const ExperimentReport& rep);

// Writes <name>.json, <name>.csv, <name>.txt into config.output_dir (created
// if missing) and returns the paths. Throws input_error when output_dir is
// empty or cannot be created.
std::vector<std::string> write_report_files(const ExperimentReport& rep);

// Flat key-value config files: `key = value` lines, `[section]` headers
// qualifying the keys that follow ("berger.r-min"), '#' comments. Unsectioned
// keys belong to the experiment section.
std::vector<std::pair<std::string, std::string>> parse_config_entries(const std::string& path);

// Applies one section-qualified entry; input_error on unknown keys or
// malformed values. Shared by the config file loader and the CLI flags.
void apply_config_entry(ExperimentConfig* cfg, const std::string& key, const std::string& value);

// Parses and applies a whole file on top of the built-in defaults.
ExperimentConfig load_config_file(const std::string& path);

}  // namespace minlab
