#pragma once
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "cfran/scenario.hpp"

namespace cfran {

inline constexpr std::string_view kVersion = "0.1.0";

// one sweep dimension: a config field name and its value grid
struct SweepAxis {
  std::string param;
  std::vector<double> values;
};

struct ExperimentSpec {
  ScenarioConfig base;
  std::vector<SweepAxis> axes;        // cartesian product, declared order
  std::vector<std::string> metrics;   // se_cdf, se_mean, eps_curve,
                                      // bound_quadruple, dispersion_mean
  std::string output_path;            // base path, extensions appended
  int workers = 0;                    // 0 = one per hardware thread
  int rrus_per_edu = 0;               // > 0 ties num_rrus = this * num_edus
};

// fields an axis may reference
bool is_sweepable_field(const std::string& name);
// throws ConfigError on unknown axis fields, empty grids, bad metric names
void validate_spec(const ExperimentSpec& spec);
// base config with axis values applied (and the rrus_per_edu coupling)
ScenarioConfig config_at(const ExperimentSpec& spec, const std::vector<double>& coords);

// long-format result rows; trial < 0 marks an aggregate row carrying a
// standard error
struct ResultRow {
  std::string metric;
  long long trial = -1;
  std::vector<double> coords;  // one value per spec axis, declared order
  double value = 0.0;
  double se = std::numeric_limits<double>::quiet_NaN();
};

struct ResultTable {
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string version = std::string(kVersion);
  std::vector<std::string> axis_names;
  std::vector<ResultRow> rows;

  std::string to_csv() const;
  std::string to_json() const;
  // writes base.csv and base.json
  void write(const std::string& base_path) const;
};

// one full per-trial SINR pipeline pass: geometry, fading, grouping,
// channel draw, (optional) estimation and DCC, combining
Eigen::VectorXd trial_sinr(const ScenarioConfig& config, int trial);

// Fig. 3 / Fig. 2 style run: per-trial finite-blocklength sum SE under ZF
// with perfect CSI next to the closed-form bound quadruple per geometry
ResultTable run_bound_validation(const ExperimentSpec& spec);

// mean (and optionally per-trial) SE over sweep grids
ResultTable run_se_sweep(const ExperimentSpec& spec);

// achieved error probability at the configured per-UE SE target
ResultTable run_error_sweep(const ExperimentSpec& spec);

// paired graph-coloring vs k-means++ comparison on shared geometry and
// channels
ResultTable run_association_comparison(const ExperimentSpec& spec);

// named figure-replication presets
std::vector<std::string> preset_names();
ExperimentSpec preset_spec(const std::string& name);
// runner a preset belongs to: validate-bounds, sweep, error-sweep or
// compare-assoc
std::string preset_runner(const std::string& name);

// spec (de)serialization used by preset dumps and run manifests
std::string spec_to_json(const ExperimentSpec& spec, const std::string& runner);
ExperimentSpec load_spec(const std::string& json_text, std::string* runner = nullptr);

}  // namespace cfran
