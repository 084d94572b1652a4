#include "cfran/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "cfran/errors.hpp"

namespace cfran {

double path_loss_free_space(double d, double alpha) {
  if (d <= 0.0) throw std::domain_error("path_loss_free_space: distance must be > 0");
  return std::pow(d, -alpha);
}

double path_loss_3gpp(double d, double shadow_db) {
  if (d <= 0.0) throw std::domain_error("path_loss_3gpp: distance must be > 0");
  double db = -30.5 - 36.7 * std::log10(d) + shadow_db;
  return std::pow(10.0, db / 10.0);
}

LargeScaleFading make_large_scale(const ScenarioConfig& config, const Geometry& geometry,
                                  RngStream& shadow_stream) {
  const int K = config.num_ues;
  const int L = config.num_rrus;
  LargeScaleFading f;
  f.beta.resize(K, L);
  f.shadow_db = Eigen::MatrixXd::Zero(K, L);
  const bool shadowing = config.path_loss_model == PathLossModel::ThreeGpp &&
                         config.shadow_sigma_db > 0.0;
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      double d = geometry.ue_rru_dist(k, l);
      if (config.path_loss_model == PathLossModel::FreeSpace) {
        f.beta(k, l) = path_loss_free_space(d, config.path_loss_exponent);
      } else {
        if (shadowing) f.shadow_db(k, l) = config.shadow_sigma_db * shadow_stream.normal();
        f.beta(k, l) = path_loss_3gpp(d, f.shadow_db(k, l));
      }
    }
  }
  return f;
}

Eigen::MatrixXcd local_scattering_correlation(int antennas, double mean_azimuth_rad,
                                              double asd_azimuth_deg,
                                              double asd_elevation_deg) {
  const double sig_az = asd_azimuth_deg * M_PI / 180.0;
  const double sig_el = asd_elevation_deg * M_PI / 180.0;
  // zero spread collapses that axis to its mean angle
  const int n_az = sig_az > 0.0 ? 40 : 1;
  const int n_el = sig_el > 0.0 ? 5 : 1;

  std::vector<double> az(n_az), waz(n_az), el(n_el), wel(n_el);
  for (int i = 0; i < n_az; ++i) {
    if (n_az == 1) {
      az[i] = mean_azimuth_rad;
      waz[i] = 1.0;
    } else {
      // midpoint rule over +/- 4 sigma, Gaussian weights
      double t = -4.0 + 8.0 * (i + 0.5) / n_az;
      az[i] = mean_azimuth_rad + sig_az * t;
      waz[i] = std::exp(-0.5 * t * t);
    }
  }
  for (int i = 0; i < n_el; ++i) {
    if (n_el == 1) {
      el[i] = 0.0;
      wel[i] = 1.0;
    } else {
      double t = -4.0 + 8.0 * (i + 0.5) / n_el;
      el[i] = sig_el * t;
      wel[i] = std::exp(-0.5 * t * t);
    }
  }
  double wsum = std::accumulate(waz.begin(), waz.end(), 0.0) *
                std::accumulate(wel.begin(), wel.end(), 0.0);

  // first row of the Toeplitz matrix: c[d] = E exp(j*pi*d*sin(az)*cos(el))
  std::vector<std::complex<double>> c(antennas);
  for (int d = 0; d < antennas; ++d) {
    std::complex<double> acc = 0.0;
    for (int a = 0; a < n_az; ++a) {
      for (int e = 0; e < n_el; ++e) {
        double phase = M_PI * d * std::sin(az[a]) * std::cos(el[e]);
        acc += waz[a] * wel[e] * std::complex<double>(std::cos(phase), std::sin(phase));
      }
    }
    c[d] = acc / wsum;
  }
  Eigen::MatrixXcd r(antennas, antennas);
  for (int a = 0; a < antennas; ++a) {
    for (int b = 0; b < antennas; ++b) {
      r(a, b) = a >= b ? c[a - b] : std::conj(c[b - a]);
    }
  }
  return r;
}

Eigen::MatrixXcd build_correlation(const ScenarioConfig& config, const Geometry& geometry,
                                   int k, int l) {
  const int N = config.antennas_per_rru;
  if (config.correlation_model == CorrelationModel::Iid) {
    return Eigen::MatrixXcd::Identity(N, N);
  }
  Eigen::Vector2d diff = geometry.rru_positions[l] - geometry.ue_positions[k];
  double bearing = std::atan2(diff.y(), diff.x());
  return local_scattering_correlation(N, bearing, config.asd_azimuth_deg,
                                      config.asd_elevation_deg);
}

namespace {

Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r);
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-10 * r.rows()) {
    throw std::domain_error("correlation matrix is not positive semi-definite");
  }
  Eigen::VectorXd root = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

CorrelationSet build_correlation_set(const ScenarioConfig& config, const Geometry& geometry) {
  CorrelationSet set;
  set.num_ues = config.num_ues;
  set.num_rrus = config.num_rrus;
  set.antennas = config.antennas_per_rru;
  const int total = set.num_ues * set.num_rrus;
  set.r.reserve(total);
  if (config.correlation_model == CorrelationModel::Iid) {
    Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(set.antennas, set.antennas);
    set.r.assign(total, eye);
    set.sqrt_r.assign(total, eye);
    return set;
  }
  set.sqrt_r.reserve(total);
  for (int k = 0; k < set.num_ues; ++k) {
    for (int l = 0; l < set.num_rrus; ++l) {
      set.r.push_back(build_correlation(config, geometry, k, l));
      set.sqrt_r.push_back(hermitian_sqrt(set.r.back()));
    }
  }
  return set;
}

Eigen::VectorXcd draw_channel(const Eigen::VectorXd& beta_row, const CorrelationSet& corr,
                              int k, RngStream& stream) {
  const int L = corr.num_rrus;
  const int N = corr.antennas;
  Eigen::VectorXcd h(L * N);
  Eigen::VectorXcd g(N);
  for (int l = 0; l < L; ++l) {
    for (int a = 0; a < N; ++a) g(a) = stream.cnormal();
    double scale = std::sqrt(beta_row(l));
    if (N == 1) {
      h(l) = scale * corr.sqrt_r[k * L + l](0, 0) * g(0);
    } else {
      h.segment(l * N, N) = scale * (corr.sqrt_r[k * L + l] * g);
    }
  }
  return h;
}

Eigen::MatrixXcd draw_channel_matrix(const LargeScaleFading& fading,
                                     const CorrelationSet& corr, RngStream& stream) {
  const int K = corr.num_ues;
  Eigen::MatrixXcd h(corr.num_rrus * corr.antennas, K);
  for (int k = 0; k < K; ++k) {
    h.col(k) = draw_channel(fading.beta.row(k).transpose(), corr, k, stream);
  }
  return h;
}

std::vector<int> assign_pilots(const ScenarioConfig& config, const LargeScaleFading& fading) {
  const int K = config.num_ues;
  const int P = config.num_pilots;
  if (P < 1) {
    throw ConfigError("pilot count must be resolved to >= 1 before pilot assignment");
  }
  std::vector<int> pilot(K, -1);
  if (K <= P) {
    // enough pilots for everyone; keep it orthogonal
    for (int k = 0; k < K; ++k) pilot[k] = k;
    return pilot;
  }
  // strongest UEs pick first; each picks the least-loaded pilot and, among
  // those, the one with the least co-pilot power overlap at its strongest RRU
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> peak(K);
  std::vector<int> master(K);
  for (int k = 0; k < K; ++k) {
    peak[k] = fading.beta.row(k).maxCoeff(&master[k]);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return peak[a] > peak[b]; });

  std::vector<int> load(P, 0);
  for (int k : order) {
    int min_load = *std::min_element(load.begin(), load.end());
    int best = -1;
    double best_contamination = 0.0;
    for (int t = 0; t < P; ++t) {
      if (load[t] != min_load) continue;
      double contamination = 0.0;
      for (int j = 0; j < K; ++j) {
        if (pilot[j] == t) contamination += fading.beta(j, master[k]);
      }
      if (best < 0 || contamination < best_contamination) {
        best = t;
        best_contamination = contamination;
      }
    }
    pilot[k] = best;
    ++load[best];
  }
  return pilot;
}

Eigen::MatrixXcd estimate_channels(const Eigen::MatrixXcd& h, const LargeScaleFading& fading,
                                   const CorrelationSet& corr, const std::vector<int>& pilots,
                                   const ScenarioConfig& config, RngStream& noise_stream) {
  const int K = corr.num_ues;
  const int L = corr.num_rrus;
  const int N = corr.antennas;
  const double p = config.uplink_power_mw;
  const double lp = static_cast<double>(config.num_pilots);
  const double sigma2 = config.noise_power_mw();
  const double amp = std::sqrt(lp * p);  // despread pilot amplitude

  std::set<int> used(pilots.begin(), pilots.end());
  Eigen::MatrixXcd h_hat = Eigen::MatrixXcd::Zero(L * N, K);

  Eigen::VectorXcd y(N), noise(N);
  for (int l = 0; l < L; ++l) {
    for (int t : used) {
      // despread observation for pilot t at RRU l
      for (int a = 0; a < N; ++a) noise(a) = std::sqrt(sigma2) * noise_stream.cnormal();
      y = noise;
      for (int i = 0; i < K; ++i) {
        if (pilots[i] == t) y += amp * h.col(i).segment(l * N, N);
      }
      // shared covariance of y across co-pilot users
      Eigen::MatrixXcd psi = sigma2 * Eigen::MatrixXcd::Identity(N, N);
      for (int i = 0; i < K; ++i) {
        if (pilots[i] == t) psi += lp * p * fading.beta(i, l) * corr.of(i, l);
      }
      Eigen::LDLT<Eigen::MatrixXcd> ldlt(psi);
      Eigen::VectorXcd solved = ldlt.solve(y);
      for (int k = 0; k < K; ++k) {
        if (pilots[k] != t) continue;
        h_hat.col(k).segment(l * N, N) =
            amp * fading.beta(k, l) * (corr.of(k, l) * solved);
      }
    }
  }
  return h_hat;
}

void dump_channel_binary(const std::string& path, const Eigen::MatrixXcd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  std::int64_t rows = m.rows(), cols = m.cols();
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  // x86-64 doubles are already little-endian; write row-major pairs
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      double re = m(r, c).real(), im = m(r, c).imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof(re));
      out.write(reinterpret_cast<const char*>(&im), sizeof(im));
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

Eigen::MatrixXcd load_channel_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::int64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!in || rows < 0 || cols < 0) throw std::runtime_error("bad header in " + path);
  Eigen::MatrixXcd m(rows, cols);
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      double re = 0.0, im = 0.0;
      in.read(reinterpret_cast<char*>(&re), sizeof(re));
      in.read(reinterpret_cast<char*>(&im), sizeof(im));
      m(r, c) = {re, im};
    }
  }
  if (!in) throw std::runtime_error("truncated data in " + path);
  return m;
}

}  // namespace cfran
