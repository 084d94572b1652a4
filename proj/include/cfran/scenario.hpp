#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfran/rng.hpp"

namespace cfran {

enum class PathLossModel { FreeSpace, ThreeGpp };
enum class CorrelationModel { Iid, LocalScattering };
enum class CsiMode { Perfect, Estimated };
enum class AssociationMode { Full, Dcc };
enum class RruGrouping { GraphColoring, KMeansPp, Interleaved, Manual };
enum class Combiner { Zf, Mmse, Mr };

struct TabuKnobs {
  int tenure = 7;
  int max_iters = 10000;
  int restarts = 5;
};

// Full experiment parameterization. Loaded from a JSON file with unknown keys
// rejected at every level (a silently ignored typo would change results).
struct ScenarioConfig {
  double area_side = 0;       // meters, square deployment region
  int num_rrus = 0;           // L
  int antennas_per_rru = 1;   // N
  int num_ues = 0;            // K
  int num_edus = 0;           // M
  double uplink_power_mw = 200.0;   // per UE, uniform
  double noise_psd_dbm_hz = -174.0;
  double bandwidth_hz = 20e6;
  double carrier_freq_hz = 2e9;
  int num_pilots = 0;         // L_P; defaults to K (orthogonal) when unset
  double block_length = 0;    // n, symbols
  double error_prob = 0;      // eps
  bool bare_dispersion = false;

  PathLossModel path_loss_model = PathLossModel::FreeSpace;
  double path_loss_exponent = 4.0;   // alpha, free-space model
  double shadow_sigma_db = 4.0;      // 3GPP model; 0 disables shadowing

  CorrelationModel correlation_model = CorrelationModel::Iid;
  double asd_azimuth_deg = 15.0;
  double asd_elevation_deg = 15.0;

  CsiMode csi_mode = CsiMode::Perfect;
  AssociationMode association_mode = AssociationMode::Full;
  RruGrouping rru_grouping = RruGrouping::Interleaved;
  std::vector<std::vector<int>> manual_partition;  // only for Manual grouping
  Combiner combiner = Combiner::Zf;

  double target_se_per_ue = 1.0;  // bits/s/Hz, for error-probability sweeps
  std::uint64_t master_seed = 1;
  int trials = 200;

  TabuKnobs tabu;
  int kmeans_restarts = 5;
  double delta_init = 0.25;      // initial conflict-distance fraction
  int bisect_max_iters = 30;

  // noise power over the full bandwidth, in mW
  double noise_power_mw() const;
  // uplink SNR p/sigma^2 (linear), the power scale used throughout
  double rho() const { return uplink_power_mw / noise_power_mw(); }
};

// UE positions keep at least this clearance from every RRU so the path-loss
// singularity at d -> 0 cannot occur (resampled at generation time).
inline constexpr double kMinUeRruDistanceM = 1.0;

struct Geometry {
  std::vector<Eigen::Vector2d> rru_positions;  // length L
  std::vector<Eigen::Vector2d> ue_positions;   // length K
  Eigen::MatrixXd rru_rru_dist;                // L x L
  Eigen::MatrixXd ue_rru_dist;                 // K x L, all >= 1 m
};

ScenarioConfig load_config(const std::string& json_text);
ScenarioConfig load_config_file(const std::string& path);

// canonical resolved-config JSON (defaults filled in); feeding it back through
// load_config reproduces the identical config
std::string config_to_json(const ScenarioConfig& config);

// FNV-1a over the canonical JSON, hex string; stamped into result tables
std::string config_hash(const ScenarioConfig& config);

// apply a "dotted.path=value" override onto raw config JSON text
std::string apply_override(const std::string& json_text, const std::string& assignment);

Geometry generate_geometry(const ScenarioConfig& config, RngStream& stream);

}  // namespace cfran
