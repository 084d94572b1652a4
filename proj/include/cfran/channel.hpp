#pragma once
#include <vector>

#include <Eigen/Dense>

#include "cfran/rng.hpp"
#include "cfran/scenario.hpp"

namespace cfran {

// Channel stacking order everywhere: RRU-major, antenna-minor. Row block
// [l*N, (l+1)*N) of a stacked vector/matrix belongs to RRU l.

struct LargeScaleFading {
  Eigen::MatrixXd beta;       // K x L linear power gains
  Eigen::MatrixXd shadow_db;  // K x L, zeros unless 3GPP shadowing is on
};

// Per-(UE, RRU) spatial correlation matrices plus the Hermitian square roots
// used to shape channel draws. Index layout: k * L + l.
struct CorrelationSet {
  int num_ues = 0;
  int num_rrus = 0;
  int antennas = 0;
  std::vector<Eigen::MatrixXcd> r;
  std::vector<Eigen::MatrixXcd> sqrt_r;
  const Eigen::MatrixXcd& of(int k, int l) const { return r[k * num_rrus + l]; }
};

struct ChannelRealization {
  Eigen::MatrixXcd h;      // (L*N) x K, column k is the stacked channel of UE k
  Eigen::MatrixXcd h_hat;  // same shape; equals h under perfect CSI
};

double path_loss_free_space(double d, double alpha);
double path_loss_3gpp(double d, double shadow_db);

LargeScaleFading make_large_scale(const ScenarioConfig& config, const Geometry& geometry,
                                  RngStream& shadow_stream);

// Gaussian local scattering over a half-wavelength ULA: the (a,b) entry is
// E[exp(j*pi*(a-b)*sin(az)*cos(el))] with az ~ N(mean_azimuth, asd_az^2) and
// el ~ N(0, asd_el^2), evaluated by a fixed midpoint quadrature (40 azimuth x
// 5 elevation points over +/-4 sigma). Diagonal is exactly 1, so trace = N,
// and the matrix is a nonnegative mixture of steering outer products (PSD).
Eigen::MatrixXcd local_scattering_correlation(int antennas, double mean_azimuth_rad,
                                              double asd_azimuth_deg,
                                              double asd_elevation_deg);

Eigen::MatrixXcd build_correlation(const ScenarioConfig& config, const Geometry& geometry,
                                   int k, int l);

CorrelationSet build_correlation_set(const ScenarioConfig& config, const Geometry& geometry);

// h_k = B^(1/2) g with g ~ CN(0, blockdiag(R_{k,l})); beta_row has length L
Eigen::VectorXcd draw_channel(const Eigen::VectorXd& beta_row, const CorrelationSet& corr,
                              int k, RngStream& stream);

// all K stacked channels for one coherence block (h_hat left empty here;
// estimation or the perfect-CSI copy is the caller's choice)
Eigen::MatrixXcd draw_channel_matrix(const LargeScaleFading& fading,
                                     const CorrelationSet& corr, RngStream& stream);

// pilot index per UE; greedy contamination-minimizing balance when K > L_P
std::vector<int> assign_pilots(const ScenarioConfig& config, const LargeScaleFading& fading);

// per-RRU LMMSE estimates from despread pilot observations (co-pilot
// interference and noise included); pilot power equals data power
Eigen::MatrixXcd estimate_channels(const Eigen::MatrixXcd& h, const LargeScaleFading& fading,
                                   const CorrelationSet& corr, const std::vector<int>& pilots,
                                   const ScenarioConfig& config, RngStream& noise_stream);

// regression dump: two little-endian int64 dims (rows, cols), then row-major
// (re, im) little-endian doubles
void dump_channel_binary(const std::string& path, const Eigen::MatrixXcd& m);
Eigen::MatrixXcd load_channel_binary(const std::string& path);

}  // namespace cfran
