#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

#include "cfran/errors.hpp"
#include "cfran/rng.hpp"
#include "cfran/scenario.hpp"

using namespace cfran;

namespace {

// minimal valid config; tests patch individual fields via apply_override
const char* kBaseConfig = R"({
  "area_side": 200,
  "num_rrus": 100,
  "antennas_per_rru": 4,
  "num_ues": 24,
  "num_edus": 4,
  "num_pilots": 24,
  "block_length": 100,
  "error_prob": 1e-5
})";

ScenarioConfig base_with(const std::string& assignment) {
  return load_config(apply_override(kBaseConfig, assignment));
}

}  // namespace

TEST_CASE("typical deployment config loads with defaults applied") {
  ScenarioConfig c = load_config(kBaseConfig);
  CHECK(c.area_side == 200.0);
  CHECK(c.num_rrus == 100);
  CHECK(c.antennas_per_rru == 4);
  CHECK(c.num_ues == 24);
  CHECK(c.num_edus == 4);
  CHECK(c.num_pilots == 24);
  CHECK(c.block_length == 100.0);
  CHECK(c.error_prob == 1e-5);
  // defaults
  CHECK(c.uplink_power_mw == 200.0);
  CHECK(c.noise_psd_dbm_hz == -174.0);
  CHECK(c.bandwidth_hz == 20e6);
  CHECK(c.carrier_freq_hz == 2e9);
  CHECK(c.shadow_sigma_db == 4.0);
  CHECK(c.asd_azimuth_deg == 15.0);
  CHECK(c.asd_elevation_deg == 15.0);
  CHECK(c.path_loss_model == PathLossModel::FreeSpace);
  CHECK(c.correlation_model == CorrelationModel::Iid);
  CHECK(c.csi_mode == CsiMode::Perfect);
  CHECK(c.association_mode == AssociationMode::Full);
  CHECK(c.combiner == Combiner::Zf);
  CHECK(c.tabu.tenure == 7);
  CHECK(c.tabu.max_iters == 10000);
  CHECK(c.tabu.restarts == 5);
  CHECK(c.kmeans_restarts == 5);
  CHECK(c.delta_init == 0.25);
  CHECK(c.bisect_max_iters == 30);
}

TEST_CASE("num_pilots defaults to num_ues when unset") {
  std::string text = R"({"area_side": 100, "num_rrus": 8, "num_ues": 5,
                         "num_edus": 2, "block_length": 50, "error_prob": 1e-6})";
  CHECK(load_config(text).num_pilots == 5);
}

TEST_CASE("noise power matches -174 dBm/Hz over 20 MHz") {
  ScenarioConfig c = load_config(kBaseConfig);
  // 10^((-174 + 10 log10(2e7)) / 10) mW
  CHECK(c.noise_power_mw() == doctest::Approx(7.962143411069939e-11).epsilon(1e-12));
  CHECK(c.rho() == doctest::Approx(2511886431509.582).epsilon(1e-12));
}

TEST_CASE("constraint violations are rejected with named fields") {
  CHECK_THROWS_WITH_AS(base_with("num_edus=0"),
                       "num_edus must satisfy 1 <= num_edus <= num_rrus", ConfigError);
  CHECK_THROWS_AS(base_with("num_edus=101"), ConfigError);  // M > L
  CHECK_THROWS_WITH_AS(base_with("error_prob=0.5"),
                       "error_prob must lie in the open interval (0, 0.5)", ConfigError);
  CHECK_THROWS_AS(base_with("error_prob=0"), ConfigError);
  CHECK_THROWS_AS(base_with("num_rrus=0"), ConfigError);
  CHECK_THROWS_AS(base_with("num_ues=0"), ConfigError);
  CHECK_THROWS_AS(base_with("antennas_per_rru=0"), ConfigError);
  CHECK_THROWS_AS(base_with("block_length=0"), ConfigError);
  CHECK_THROWS_AS(base_with("area_side=-5"), ConfigError);
  CHECK_THROWS_AS(base_with("uplink_power_mw=0"), ConfigError);
  CHECK_THROWS_AS(base_with("trials=0"), ConfigError);
  CHECK_THROWS_AS(base_with("delta_init=0"), ConfigError);
  CHECK_THROWS_AS(base_with("delta_init=1.5"), ConfigError);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_WITH_AS(base_with("bandwith_hz=1e7"),
                       "unknown config key 'bandwith_hz'", ConfigError);
  CHECK_THROWS_AS(base_with("path_loss.alfa=3"), ConfigError);
  CHECK_THROWS_AS(base_with("correlation.asd=10"), ConfigError);
  CHECK_THROWS_AS(base_with("tabu.tenur=3"), ConfigError);
}

TEST_CASE("missing required fields are reported by name") {
  CHECK_THROWS_WITH_AS(load_config(R"({"area_side": 100})"),
                       "missing required config field 'num_rrus'", ConfigError);
  CHECK_THROWS_AS(load_config("not json"), ConfigError);
  CHECK_THROWS_AS(load_config("[1,2,3]"), ConfigError);
}

TEST_CASE("enum fields parse and reject unsupported values") {
  CHECK(base_with("path_loss.model=three_gpp").path_loss_model == PathLossModel::ThreeGpp);
  CHECK(base_with("correlation.model=local_scattering").correlation_model ==
        CorrelationModel::LocalScattering);
  CHECK(base_with("csi_mode=estimated").csi_mode == CsiMode::Estimated);
  CHECK(base_with("association_mode=dcc").association_mode == AssociationMode::Dcc);
  CHECK(base_with("rru_grouping=graph_coloring").rru_grouping == RruGrouping::GraphColoring);
  CHECK(base_with("rru_grouping=kmeans_pp").rru_grouping == RruGrouping::KMeansPp);
  CHECK(base_with("combiner=mmse").combiner == Combiner::Mmse);
  CHECK_THROWS_AS(base_with("csi_mode=psychic"), ConfigError);
  CHECK_THROWS_AS(base_with("rru_grouping=random"), ConfigError);
  CHECK_THROWS_AS(base_with("combiner=zeroforce"), ConfigError);
}

TEST_CASE("manual grouping requires an explicit partition") {
  CHECK_THROWS_AS(base_with("rru_grouping=manual"), ConfigError);
  std::string text = apply_override(kBaseConfig, "rru_grouping=manual");
  text = apply_override(text, "num_rrus=4");
  text = apply_override(text, "num_edus=2");
  text = apply_override(text, "num_ues=2");
  text = apply_override(text, "manual_partition=[[0,1],[2,3]]");
  ScenarioConfig c = load_config(text);
  REQUIRE(c.manual_partition.size() == 2);
  CHECK(c.manual_partition[0] == std::vector<int>{0, 1});
  CHECK(c.manual_partition[1] == std::vector<int>{2, 3});
}

TEST_CASE("resolved config round-trips through its own JSON dump") {
  ScenarioConfig c = base_with("master_seed=777");
  ScenarioConfig back = load_config(config_to_json(c));
  CHECK(config_hash(c) == config_hash(back));
  CHECK(back.master_seed == 777);
  CHECK(back.num_rrus == c.num_rrus);
}

TEST_CASE("manifest wrapper is accepted as a config source") {
  std::string manifest = std::string("{\"config\": ") + config_to_json(load_config(kBaseConfig)) +
                         ", \"version\": \"x\", \"config_hash\": \"y\", \"command\": \"z\"}";
  // extra sibling keys belong to the manifest, not the config; only the
  // wrapped object is read
  ScenarioConfig c = load_config(manifest);
  CHECK(c.num_rrus == 100);
}

TEST_CASE("config hash distinguishes configs and is stable") {
  ScenarioConfig a = load_config(kBaseConfig);
  CHECK(config_hash(a) == config_hash(load_config(kBaseConfig)));
  CHECK(config_hash(a) != config_hash(base_with("master_seed=2")));
  CHECK(config_hash(a) != config_hash(base_with("block_length=101")));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("dotted overrides patch nested fields and validate") {
  CHECK(base_with("block_length=200").block_length == 200.0);
  CHECK(base_with("tabu.tenure=9").tabu.tenure == 9);
  CHECK(base_with("path_loss.alpha=2").path_loss_exponent == 2.0);
  CHECK_THROWS_AS(apply_override(kBaseConfig, "no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(apply_override(kBaseConfig, "=5"), ConfigError);
  CHECK_THROWS_AS(base_with("tabu.tenure=maybe"), ConfigError);  // wrong type
}

TEST_CASE("master_seed environment override wins over the file") {
  setenv("CFRAN_MASTER_SEED", "424242", 1);
  CHECK(load_config(kBaseConfig).master_seed == 424242);
  setenv("CFRAN_MASTER_SEED", "12x", 1);
  CHECK_THROWS_AS(load_config(kBaseConfig), ConfigError);
  unsetenv("CFRAN_MASTER_SEED");
  CHECK(load_config(kBaseConfig).master_seed == 1);
}

TEST_CASE("geometry stays inside the square with consistent distances") {
  ScenarioConfig c = load_config(kBaseConfig);
  RngStream stream = derive_stream(c.master_seed, 0, "geometry");
  Geometry g = generate_geometry(c, stream);
  REQUIRE(g.rru_positions.size() == 100);
  REQUIRE(g.ue_positions.size() == 24);
  for (const auto& p : g.rru_positions) {
    CHECK(p.x() >= 0.0); CHECK(p.x() <= 200.0);
    CHECK(p.y() >= 0.0); CHECK(p.y() <= 200.0);
  }
  for (const auto& p : g.ue_positions) {
    CHECK(p.x() >= 0.0); CHECK(p.x() <= 200.0);
    CHECK(p.y() >= 0.0); CHECK(p.y() <= 200.0);
  }
  double worst = 0.0;
  for (int k = 0; k < 24; ++k) {
    for (int l = 0; l < 100; ++l) {
      double d = (g.ue_positions[k] - g.rru_positions[l]).norm();
      worst = std::max(worst, std::abs(d - g.ue_rru_dist(k, l)) / std::max(d, 1.0));
      CHECK(g.ue_rru_dist(k, l) >= kMinUeRruDistanceM);
    }
  }
  for (int i = 0; i < 100; ++i) {
    CHECK(g.rru_rru_dist(i, i) == 0.0);
    for (int j = 0; j < i; ++j) {
      CHECK(g.rru_rru_dist(i, j) == doctest::Approx(g.rru_rru_dist(j, i)).epsilon(1e-12));
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("identical seed reproduces the geometry bit for bit") {
  ScenarioConfig c = load_config(kBaseConfig);
  RngStream s1 = derive_stream(c.master_seed, 3, "geometry");
  RngStream s2 = derive_stream(c.master_seed, 3, "geometry");
  Geometry a = generate_geometry(c, s1);
  Geometry b = generate_geometry(c, s2);
  for (int l = 0; l < c.num_rrus; ++l) {
    CHECK(a.rru_positions[l].x() == b.rru_positions[l].x());
    CHECK(a.rru_positions[l].y() == b.rru_positions[l].y());
  }
  for (int k = 0; k < c.num_ues; ++k) {
    CHECK(a.ue_positions[k].x() == b.ue_positions[k].x());
  }
  RngStream s3 = derive_stream(c.master_seed, 4, "geometry");
  Geometry other = generate_geometry(c, s3);
  bool any_diff = false;
  for (int l = 0; l < c.num_rrus && !any_diff; ++l) {
    any_diff = a.rru_positions[l] != other.rru_positions[l];
  }
  CHECK(any_diff);
}

TEST_CASE("coordinates look uniform: mean and KS statistic") {
  // 100 geometries of 1000 RRUs each give 1e5 draws over [0, 200]
  std::string text = apply_override(kBaseConfig, "num_rrus=1000");
  text = apply_override(text, "num_ues=1");
  ScenarioConfig c = load_config(text);
  double mean = 0.0;
  std::vector<double> xs;
  xs.reserve(100000);
  for (int trial = 0; trial < 100; ++trial) {
    RngStream stream = derive_stream(99, trial, "geometry");
    Geometry g = generate_geometry(c, stream);
    for (const auto& p : g.rru_positions) {
      mean += p.x();
      xs.push_back(p.x());
    }
  }
  mean /= xs.size();
  CHECK(mean == doctest::Approx(100.0).epsilon(0.01));  // 100 +/- 1

  // KS against uniform on the first 1e4 draws, alpha = 0.01
  xs.resize(10000);
  std::sort(xs.begin(), xs.end());
  double dks = 0.0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double cdf = xs[i] / 200.0;
    dks = std::max(dks, std::abs((i + 1) / n - cdf));
    dks = std::max(dks, std::abs(cdf - i / n));
  }
  CHECK(dks < 1.628 / std::sqrt(n));
}

TEST_CASE("UE clearance floor is enforced by resampling") {
  // 3 m box with several RRUs: most draws violate the 1 m floor, so
  // placement must resample until clear
  std::string text = R"({"area_side": 3, "num_rrus": 3, "num_ues": 4,
                         "num_edus": 1, "block_length": 50, "error_prob": 1e-6})";
  ScenarioConfig c = load_config(text);
  for (int trial = 0; trial < 20; ++trial) {
    RngStream stream = derive_stream(5, trial, "geometry");
    Geometry g = generate_geometry(c, stream);
    CHECK(g.ue_rru_dist.minCoeff() >= kMinUeRruDistanceM);
  }
}

TEST_CASE("impossible clearance raises a degenerate-geometry error") {
  // in a 0.5 m box no point can be 1 m away from any RRU
  std::string text = R"({"area_side": 0.5, "num_rrus": 1, "num_ues": 1,
                         "num_edus": 1, "block_length": 50, "error_prob": 1e-6})";
  ScenarioConfig c = load_config(text);
  RngStream stream = derive_stream(1, 0, "geometry");
  CHECK_THROWS_AS(generate_geometry(c, stream), DegenerateGeometry);
}

TEST_CASE("stream derivation is deterministic and purpose-separated") {
  RngStream a = derive_stream(42, 0, "geometry");
  RngStream b = derive_stream(42, 0, "geometry");
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c0 = derive_stream(42, 0, "geometry");
  RngStream c1 = derive_stream(42, 1, "geometry");
  RngStream d0 = derive_stream(42, 0, "channel");
  bool trial_differs = false, tag_differs = false;
  for (int i = 0; i < 100; ++i) {
    std::uint64_t base = c0.next_u64();
    if (base != c1.next_u64()) trial_differs = true;
    if (base != d0.next_u64()) tag_differs = true;
  }
  CHECK(trial_differs);
  CHECK(tag_differs);
}

TEST_CASE("uniform draws respect bounds and normal draws have sane moments") {
  RngStream s = derive_stream(7, 0, "moments");
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = s.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sq += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sq / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));

  double nsum = 0.0, nsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = s.normal();
    nsum += x;
    nsq += x * x;
  }
  CHECK(std::abs(nsum / n) < 0.01);
  CHECK(nsq / n == doctest::Approx(1.0).epsilon(0.02));

  // complex draws are unit-variance circular
  double csq = 0.0;
  for (int i = 0; i < n; ++i) csq += std::norm(s.cnormal());
  CHECK(csq / n == doctest::Approx(1.0).epsilon(0.02));
}
