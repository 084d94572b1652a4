#include "cfran/combining.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "cfran/errors.hpp"

namespace cfran {

namespace {

constexpr double kCondLimit = 1e12;

}  // namespace

std::vector<Eigen::MatrixXcd> split_per_edu(const Eigen::MatrixXcd& stacked,
                                            const Partition& partition,
                                            int antennas_per_rru) {
  const int n = antennas_per_rru;
  std::vector<Eigen::MatrixXcd> blocks;
  blocks.reserve(partition.groups.size());
  for (const auto& group : partition.groups) {
    Eigen::MatrixXcd block(static_cast<int>(group.size()) * n, stacked.cols());
    int at = 0;
    for (int rru : group) {
      block.middleRows(at, n) = stacked.middleRows(rru * n, n);
      at += n;
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

Eigen::MatrixXcd zf_combiner(const Eigen::MatrixXcd& h_edu, int edu_index) {
  const int rows = static_cast<int>(h_edu.rows());
  const int num_ues = static_cast<int>(h_edu.cols());
  if (rows < num_ues) {
    throw SingularMatrix("zero-forcing needs at least as many antennas as UEs at EDU " +
                         std::to_string(edu_index) + " (" + std::to_string(rows) + " < " +
                         std::to_string(num_ues) + ")");
  }
  Eigen::MatrixXcd gram = h_edu.adjoint() * h_edu;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi > kCondLimit * lo) {
    throw SingularMatrix("channel Gram matrix at EDU " + std::to_string(edu_index) +
                         " is numerically singular (condition above 1e12)");
  }
  // V = H G^{-1}; solve G X = H^H and conjugate back instead of inverting
  Eigen::LLT<Eigen::MatrixXcd> llt(gram);
  return llt.solve(h_edu.adjoint()).adjoint();
}

Eigen::VectorXd zf_sinr(const CombinerSet& combiners, double power_mw, double noise_mw) {
  const int num_edus = static_cast<int>(combiners.per_edu.size());
  const int num_ues = static_cast<int>(combiners.per_edu.at(0).cols());
  Eigen::VectorXd gamma(num_ues);
  for (int k = 0; k < num_ues; ++k) {
    double norm2 = 0.0;
    for (const auto& v : combiners.per_edu) norm2 += v.col(k).squaredNorm();
    gamma(k) = power_mw * num_edus * num_edus / (noise_mw * norm2);
  }
  return gamma;
}

Eigen::VectorXd instantaneous_sinr(const CombinerSet& combiners,
                                   const std::vector<Eigen::MatrixXcd>& h_per_edu,
                                   const Eigen::VectorXd& power_mw, double noise_mw) {
  const int num_ues = static_cast<int>(power_mw.size());
  Eigen::MatrixXcd merged = Eigen::MatrixXcd::Zero(num_ues, num_ues);
  Eigen::VectorXd norm2 = Eigen::VectorXd::Zero(num_ues);
  for (size_t m = 0; m < combiners.per_edu.size(); ++m) {
    merged.noalias() += combiners.per_edu[m].adjoint() * h_per_edu[m];
    for (int k = 0; k < num_ues; ++k) norm2(k) += combiners.per_edu[m].col(k).squaredNorm();
  }
  Eigen::VectorXd gamma(num_ues);
  for (int k = 0; k < num_ues; ++k) {
    double interference = 0.0;
    for (int i = 0; i < num_ues; ++i) {
      if (i != k) interference += power_mw(i) * std::norm(merged(k, i));
    }
    const double denom = interference + noise_mw * norm2(k);
    const double num = power_mw(k) * std::norm(merged(k, k));
    gamma(k) = denom > 0.0 ? num / denom : 0.0;
  }
  return gamma;
}

Eigen::MatrixXcd mmse_combiner(const Eigen::MatrixXcd& h_hat_edu,
                               const std::vector<Eigen::VectorXd>& masks,
                               const Eigen::VectorXd& power_mw, double noise_mw) {
  const int rows = static_cast<int>(h_hat_edu.rows());
  const int num_ues = static_cast<int>(h_hat_edu.cols());
  if (static_cast<int>(masks.size()) != num_ues) {
    throw std::invalid_argument("mmse_combiner: one mask per UE required");
  }
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(rows, num_ues);

  // UEs with the same served-antenna set share the covariance factorization
  std::map<std::string, std::vector<int>> by_mask;
  for (int k = 0; k < num_ues; ++k) {
    std::string key(rows, '0');
    for (int r = 0; r < rows; ++r) {
      if (masks[k](r) != 0.0) key[r] = '1';
    }
    by_mask[key].push_back(k);
  }

  for (const auto& [key, ues] : by_mask) {
    Eigen::MatrixXcd masked = h_hat_edu;
    for (int r = 0; r < rows; ++r) {
      if (key[r] == '0') masked.row(r).setZero();
    }
    Eigen::MatrixXcd weighted = masked;
    for (int k = 0; k < num_ues; ++k) weighted.col(k) *= std::sqrt(power_mw(k));
    Eigen::MatrixXcd cov = weighted * weighted.adjoint();
    cov.diagonal().array() += noise_mw;
    Eigen::LDLT<Eigen::MatrixXcd> ldlt(cov);
    if (ldlt.info() != Eigen::Success) {
      throw SingularMatrix("MMSE covariance factorization failed");
    }
    for (int k : ues) v.col(k) = power_mw(k) * ldlt.solve(masked.col(k));
  }
  return v;
}

Eigen::MatrixXcd mr_combiner(const Eigen::MatrixXcd& h_hat_edu,
                             const std::vector<Eigen::VectorXd>& masks) {
  const int rows = static_cast<int>(h_hat_edu.rows());
  const int num_ues = static_cast<int>(h_hat_edu.cols());
  if (static_cast<int>(masks.size()) != num_ues) {
    throw std::invalid_argument("mr_combiner: one mask per UE required");
  }
  Eigen::MatrixXcd v = h_hat_edu;
  for (int k = 0; k < num_ues; ++k) {
    for (int r = 0; r < rows; ++r) {
      if (masks[k](r) == 0.0) v(r, k) = 0.0;
    }
  }
  return v;
}

Eigen::MatrixXcd build_combiner(const ScenarioConfig& config,
                                const Eigen::MatrixXcd& h_hat_edu,
                                const std::vector<Eigen::VectorXd>& masks, int edu_index) {
  const int num_ues = static_cast<int>(h_hat_edu.cols());
  switch (config.combiner) {
    case Combiner::Zf:
      // zero-forcing always uses the full per-EDU channel; partial service
      // would break the column-rank requirement
      return zf_combiner(h_hat_edu, edu_index);
    case Combiner::Mmse:
      return mmse_combiner(h_hat_edu, masks,
                           Eigen::VectorXd::Constant(num_ues, config.uplink_power_mw),
                           config.noise_power_mw());
    case Combiner::Mr:
      return mr_combiner(h_hat_edu, masks);
  }
  throw UnsupportedConfig("unknown combiner");
}

CombinerSet build_combiners(const ScenarioConfig& config, const Partition& partition,
                            const AssociationMatrices& assoc,
                            const Eigen::MatrixXcd& h_hat) {
  const int n = config.antennas_per_rru;
  auto blocks = split_per_edu(h_hat, partition, n);
  CombinerSet out;
  out.per_edu.reserve(blocks.size());
  for (size_t m = 0; m < blocks.size(); ++m) {
    std::vector<Eigen::VectorXd> masks;
    masks.reserve(config.num_ues);
    for (int k = 0; k < config.num_ues; ++k) {
      masks.push_back(antenna_mask(assoc, partition, static_cast<int>(m), k, n));
    }
    out.per_edu.push_back(build_combiner(config, blocks[m], masks, static_cast<int>(m)));
  }
  return out;
}

UatfResult uatf_sinr(const ChannelDraw& draw, int num_samples,
                     const ScenarioConfig& config, const Partition& partition,
                     const AssociationMatrices& assoc) {
  if (num_samples < 10) {
    throw std::invalid_argument("uatf_sinr needs at least 10 samples");
  }
  const int num_ues = config.num_ues;
  const double noise = config.noise_power_mw();
  const Eigen::VectorXd power =
      Eigen::VectorXd::Constant(num_ues, config.uplink_power_mw);

  constexpr int kBatches = 10;
  // per-batch moment sums: signal mean (complex), interference power, noise gain
  std::vector<Eigen::VectorXcd> sig(kBatches, Eigen::VectorXcd::Zero(num_ues));
  std::vector<Eigen::VectorXd> cross(kBatches, Eigen::VectorXd::Zero(num_ues));
  std::vector<Eigen::VectorXd> noise_gain(kBatches, Eigen::VectorXd::Zero(num_ues));
  std::vector<int> count(kBatches, 0);

  Eigen::MatrixXcd h, h_hat;
  for (int s = 0; s < num_samples; ++s) {
    draw(s, h, h_hat);
    CombinerSet combiners = build_combiners(config, partition, assoc, h_hat);
    auto h_blocks = split_per_edu(h, partition, config.antennas_per_rru);

    Eigen::MatrixXcd merged = Eigen::MatrixXcd::Zero(num_ues, num_ues);
    Eigen::VectorXd norm2 = Eigen::VectorXd::Zero(num_ues);
    for (size_t m = 0; m < combiners.per_edu.size(); ++m) {
      merged.noalias() += combiners.per_edu[m].adjoint() * h_blocks[m];
      for (int k = 0; k < num_ues; ++k) {
        norm2(k) += combiners.per_edu[m].col(k).squaredNorm();
      }
    }
    const int b = static_cast<int>(static_cast<long long>(s) * kBatches / num_samples);
    for (int k = 0; k < num_ues; ++k) {
      sig[b](k) += merged(k, k);
      double inter = 0.0;
      for (int i = 0; i < num_ues; ++i) {
        if (i != k) inter += power(i) * std::norm(merged(k, i));
      }
      cross[b](k) += inter;
      noise_gain[b](k) += norm2(k);
    }
    ++count[b];
  }

  auto gamma_from = [&](std::complex<double> sig_sum, double cross_sum, double gain_sum,
                        double n_samp, int k) {
    const double num = power(k) * std::norm(sig_sum / n_samp);
    const double denom = cross_sum / n_samp + noise * gain_sum / n_samp;
    return denom > 0.0 ? num / denom : 0.0;
  };

  UatfResult out;
  out.gamma.resize(num_ues);
  out.gamma_se.resize(num_ues);
  for (int k = 0; k < num_ues; ++k) {
    std::complex<double> sig_all = 0.0;
    double cross_all = 0.0, gain_all = 0.0;
    for (int b = 0; b < kBatches; ++b) {
      sig_all += sig[b](k);
      cross_all += cross[b](k);
      gain_all += noise_gain[b](k);
    }
    out.gamma(k) = gamma_from(sig_all, cross_all, gain_all, num_samples, k);

    double mean = 0.0, mean2 = 0.0;
    int used = 0;
    for (int b = 0; b < kBatches; ++b) {
      if (count[b] == 0) continue;
      const double g = gamma_from(sig[b](k), cross[b](k), noise_gain[b](k), count[b], k);
      mean += g;
      mean2 += g * g;
      ++used;
    }
    mean /= used;
    mean2 /= used;
    const double var = std::max(0.0, mean2 - mean * mean);
    out.gamma_se(k) = used > 1 ? std::sqrt(var / (used - 1)) : 0.0;
  }
  return out;
}

}  // namespace cfran
