#include "cfran/scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cfran/errors.hpp"

namespace cfran {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& scope) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError("unknown config key '" + scope + it.key() + "'");
    }
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

void require_field(const json& obj, const char* key) {
  if (!obj.contains(key)) {
    throw ConfigError(std::string("missing required config field '") + key + "'");
  }
}

std::string enum_value(const json& obj, const char* key, const std::string& fallback) {
  std::string v = fallback;
  read_field(obj, key, v);
  return v;
}

[[noreturn]] void bad_enum(const char* key, const std::string& got) {
  throw ConfigError(std::string("config field '") + key + "' has unsupported value '" + got + "'");
}

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

double ScenarioConfig::noise_power_mw() const {
  double dbm = noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz);
  return std::pow(10.0, dbm / 10.0);
}

ScenarioConfig load_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");

  // a manifest written by the CLI wraps the config under "config"; accept it
  // directly so manifests round-trip
  if (root.contains("config") && root.at("config").is_object()) {
    root = root.at("config");
  }

  static const std::set<std::string> top_keys = {
      "area_side", "num_rrus", "antennas_per_rru", "num_ues", "num_edus",
      "uplink_power_mw", "noise_psd_dbm_hz", "bandwidth_hz", "carrier_freq_hz",
      "num_pilots", "block_length", "error_prob", "bare_dispersion",
      "path_loss", "correlation", "csi_mode", "association_mode",
      "rru_grouping", "manual_partition", "combiner", "target_se_per_ue",
      "master_seed", "trials", "tabu", "kmeans_restarts", "delta_init",
      "bisect_max_iters"};
  reject_unknown_keys(root, top_keys, "");

  for (const char* k : {"area_side", "num_rrus", "num_ues", "num_edus",
                        "block_length", "error_prob"}) {
    require_field(root, k);
  }

  ScenarioConfig c;
  read_field(root, "area_side", c.area_side);
  read_field(root, "num_rrus", c.num_rrus);
  read_field(root, "antennas_per_rru", c.antennas_per_rru);
  read_field(root, "num_ues", c.num_ues);
  read_field(root, "num_edus", c.num_edus);
  read_field(root, "uplink_power_mw", c.uplink_power_mw);
  read_field(root, "noise_psd_dbm_hz", c.noise_psd_dbm_hz);
  read_field(root, "bandwidth_hz", c.bandwidth_hz);
  read_field(root, "carrier_freq_hz", c.carrier_freq_hz);
  c.num_pilots = c.num_ues;
  read_field(root, "num_pilots", c.num_pilots);
  read_field(root, "block_length", c.block_length);
  read_field(root, "error_prob", c.error_prob);
  read_field(root, "bare_dispersion", c.bare_dispersion);
  read_field(root, "target_se_per_ue", c.target_se_per_ue);
  read_field(root, "master_seed", c.master_seed);
  read_field(root, "trials", c.trials);
  read_field(root, "kmeans_restarts", c.kmeans_restarts);
  read_field(root, "delta_init", c.delta_init);
  read_field(root, "bisect_max_iters", c.bisect_max_iters);

  if (root.contains("path_loss")) {
    const json& pl = root.at("path_loss");
    reject_unknown_keys(pl, {"model", "alpha", "shadow_sigma_db"}, "path_loss.");
    std::string model = enum_value(pl, "model", "free_space");
    if (model == "free_space") c.path_loss_model = PathLossModel::FreeSpace;
    else if (model == "three_gpp") c.path_loss_model = PathLossModel::ThreeGpp;
    else bad_enum("path_loss.model", model);
    read_field(pl, "alpha", c.path_loss_exponent);
    read_field(pl, "shadow_sigma_db", c.shadow_sigma_db);
  }

  if (root.contains("correlation")) {
    const json& co = root.at("correlation");
    reject_unknown_keys(co, {"model", "asd_azimuth_deg", "asd_elevation_deg"},
                        "correlation.");
    std::string model = enum_value(co, "model", "iid");
    if (model == "iid") c.correlation_model = CorrelationModel::Iid;
    else if (model == "local_scattering") c.correlation_model = CorrelationModel::LocalScattering;
    else bad_enum("correlation.model", model);
    read_field(co, "asd_azimuth_deg", c.asd_azimuth_deg);
    read_field(co, "asd_elevation_deg", c.asd_elevation_deg);
  }

  if (root.contains("tabu")) {
    const json& tb = root.at("tabu");
    reject_unknown_keys(tb, {"tenure", "max_iters", "restarts"}, "tabu.");
    read_field(tb, "tenure", c.tabu.tenure);
    read_field(tb, "max_iters", c.tabu.max_iters);
    read_field(tb, "restarts", c.tabu.restarts);
  }

  std::string csi = enum_value(root, "csi_mode", "perfect");
  if (csi == "perfect") c.csi_mode = CsiMode::Perfect;
  else if (csi == "estimated") c.csi_mode = CsiMode::Estimated;
  else bad_enum("csi_mode", csi);

  std::string assoc = enum_value(root, "association_mode", "full");
  if (assoc == "full") c.association_mode = AssociationMode::Full;
  else if (assoc == "dcc") c.association_mode = AssociationMode::Dcc;
  else bad_enum("association_mode", assoc);

  std::string grouping = enum_value(root, "rru_grouping", "interleaved");
  if (grouping == "graph_coloring") c.rru_grouping = RruGrouping::GraphColoring;
  else if (grouping == "kmeans_pp") c.rru_grouping = RruGrouping::KMeansPp;
  else if (grouping == "interleaved") c.rru_grouping = RruGrouping::Interleaved;
  else if (grouping == "manual") c.rru_grouping = RruGrouping::Manual;
  else bad_enum("rru_grouping", grouping);
  read_field(root, "manual_partition", c.manual_partition);

  std::string comb = enum_value(root, "combiner", "zf");
  if (comb == "zf") c.combiner = Combiner::Zf;
  else if (comb == "mmse") c.combiner = Combiner::Mmse;
  else if (comb == "mr") c.combiner = Combiner::Mr;
  else bad_enum("combiner", comb);

  if (const char* env = std::getenv("CFRAN_MASTER_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw ConfigError("CFRAN_MASTER_SEED must be an unsigned integer");
    }
    c.master_seed = v;
  }

  check(c.area_side > 0, "area_side must be > 0");
  check(c.num_rrus >= 1, "num_rrus must be >= 1");
  check(c.antennas_per_rru >= 1, "antennas_per_rru must be >= 1");
  check(c.num_ues >= 1, "num_ues must be >= 1");
  check(c.num_edus >= 1 && c.num_edus <= c.num_rrus,
        "num_edus must satisfy 1 <= num_edus <= num_rrus");
  check(c.uplink_power_mw > 0, "uplink_power_mw must be > 0");
  check(c.bandwidth_hz > 0, "bandwidth_hz must be > 0");
  check(c.carrier_freq_hz > 0, "carrier_freq_hz must be > 0");
  check(c.num_pilots >= 1, "num_pilots must be >= 1");
  check(c.block_length >= 1, "block_length must be >= 1");
  check(c.error_prob > 0 && c.error_prob < 0.5,
        "error_prob must lie in the open interval (0, 0.5)");
  check(c.path_loss_exponent > 0, "path_loss.alpha must be > 0");
  check(c.shadow_sigma_db >= 0, "path_loss.shadow_sigma_db must be >= 0");
  check(c.asd_azimuth_deg >= 0 && c.asd_elevation_deg >= 0,
        "correlation angular spreads must be >= 0");
  check(c.target_se_per_ue > 0, "target_se_per_ue must be > 0");
  check(c.trials >= 1, "trials must be >= 1");
  check(c.tabu.tenure >= 1 && c.tabu.max_iters >= 1 && c.tabu.restarts >= 1,
        "tabu knobs must be >= 1");
  check(c.kmeans_restarts >= 1, "kmeans_restarts must be >= 1");
  check(c.delta_init > 0 && c.delta_init <= 1, "delta_init must lie in (0, 1]");
  check(c.bisect_max_iters >= 1, "bisect_max_iters must be >= 1");
  if (c.rru_grouping == RruGrouping::Manual) {
    check(!c.manual_partition.empty(),
          "manual rru_grouping requires manual_partition");
  }
  return c;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

std::string config_to_json(const ScenarioConfig& c) {
  json root;
  root["area_side"] = c.area_side;
  root["num_rrus"] = c.num_rrus;
  root["antennas_per_rru"] = c.antennas_per_rru;
  root["num_ues"] = c.num_ues;
  root["num_edus"] = c.num_edus;
  root["uplink_power_mw"] = c.uplink_power_mw;
  root["noise_psd_dbm_hz"] = c.noise_psd_dbm_hz;
  root["bandwidth_hz"] = c.bandwidth_hz;
  root["carrier_freq_hz"] = c.carrier_freq_hz;
  // hand-built configs may still carry the 0 placeholder; emit the resolved
  // orthogonal default so the canonical JSON always reloads
  root["num_pilots"] = c.num_pilots >= 1 ? c.num_pilots : c.num_ues;
  root["block_length"] = c.block_length;
  root["error_prob"] = c.error_prob;
  root["bare_dispersion"] = c.bare_dispersion;
  root["path_loss"]["model"] =
      c.path_loss_model == PathLossModel::FreeSpace ? "free_space" : "three_gpp";
  root["path_loss"]["alpha"] = c.path_loss_exponent;
  root["path_loss"]["shadow_sigma_db"] = c.shadow_sigma_db;
  root["correlation"]["model"] =
      c.correlation_model == CorrelationModel::Iid ? "iid" : "local_scattering";
  root["correlation"]["asd_azimuth_deg"] = c.asd_azimuth_deg;
  root["correlation"]["asd_elevation_deg"] = c.asd_elevation_deg;
  root["csi_mode"] = c.csi_mode == CsiMode::Perfect ? "perfect" : "estimated";
  root["association_mode"] =
      c.association_mode == AssociationMode::Full ? "full" : "dcc";
  switch (c.rru_grouping) {
    case RruGrouping::GraphColoring: root["rru_grouping"] = "graph_coloring"; break;
    case RruGrouping::KMeansPp: root["rru_grouping"] = "kmeans_pp"; break;
    case RruGrouping::Interleaved: root["rru_grouping"] = "interleaved"; break;
    case RruGrouping::Manual: root["rru_grouping"] = "manual"; break;
  }
  root["manual_partition"] = c.manual_partition;
  switch (c.combiner) {
    case Combiner::Zf: root["combiner"] = "zf"; break;
    case Combiner::Mmse: root["combiner"] = "mmse"; break;
    case Combiner::Mr: root["combiner"] = "mr"; break;
  }
  root["target_se_per_ue"] = c.target_se_per_ue;
  root["master_seed"] = c.master_seed;
  root["trials"] = c.trials;
  root["tabu"]["tenure"] = c.tabu.tenure;
  root["tabu"]["max_iters"] = c.tabu.max_iters;
  root["tabu"]["restarts"] = c.tabu.restarts;
  root["kmeans_restarts"] = c.kmeans_restarts;
  root["delta_init"] = c.delta_init;
  root["bisect_max_iters"] = c.bisect_max_iters;
  return root.dump(2);
}

std::string config_hash(const ScenarioConfig& config) {
  std::string text = config_to_json(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string apply_override(const std::string& json_text, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like dotted.path=value, got '" +
                      assignment + "'");
  }
  std::string path = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);

  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }

  // numbers, booleans, arrays and quoted strings parse as JSON; anything else
  // (e.g. bare enum names) is taken as a string literal
  json parsed_value;
  try {
    parsed_value = json::parse(value);
  } catch (const json::parse_error&) {
    parsed_value = value;
  }

  json* node = &root;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = path.find('.', start);
    std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError("override path has an empty segment: '" + path + "'");
    if (dot == std::string::npos) {
      (*node)[key] = parsed_value;
      break;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
  return root.dump();
}

Geometry generate_geometry(const ScenarioConfig& config, RngStream& stream) {
  Geometry g;
  const int L = config.num_rrus;
  const int K = config.num_ues;
  const double side = config.area_side;
  g.rru_positions.reserve(L);
  for (int l = 0; l < L; ++l) {
    double x = stream.uniform(0.0, side);
    double y = stream.uniform(0.0, side);
    g.rru_positions.emplace_back(x, y);
  }
  g.ue_positions.reserve(K);
  for (int k = 0; k < K; ++k) {
    // resample until the UE clears every RRU by the distance floor
    bool placed = false;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Eigen::Vector2d pos(stream.uniform(0.0, side), stream.uniform(0.0, side));
      bool clear = true;
      for (const auto& r : g.rru_positions) {
        if ((pos - r).norm() < kMinUeRruDistanceM) {
          clear = false;
          break;
        }
      }
      if (clear) {
        g.ue_positions.push_back(pos);
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw DegenerateGeometry(
          "could not place UE " + std::to_string(k) + " with " +
          std::to_string(kMinUeRruDistanceM) + " m clearance from all RRUs");
    }
  }
  g.rru_rru_dist.resize(L, L);
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      g.rru_rru_dist(i, j) = (g.rru_positions[i] - g.rru_positions[j]).norm();
    }
  }
  g.ue_rru_dist.resize(K, L);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      g.ue_rru_dist(k, l) = (g.ue_positions[k] - g.rru_positions[l]).norm();
    }
  }
  return g;
}

}  // namespace cfran
