#pragma once
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cfran/association.hpp"
#include "cfran/scenario.hpp"

namespace cfran {

// column k of per_edu[m] is the combining vector UE k gets at EDU m
struct CombinerSet {
  std::vector<Eigen::MatrixXcd> per_edu;
};

// slice the stacked (L*N) x K matrix into per-EDU row blocks following the
// partition's group order
std::vector<Eigen::MatrixXcd> split_per_edu(const Eigen::MatrixXcd& stacked,
                                            const Partition& partition,
                                            int antennas_per_rru);

// V = H (H^H H)^{-1}; pseudo-inverse columns null out cross-UE interference.
// edu_index only labels the error message.
Eigen::MatrixXcd zf_combiner(const Eigen::MatrixXcd& h_edu, int edu_index);

// gamma_k = p * M^2 / (sigma^2 * sum_m ||v_{k,m}||^2), the interference-free
// SINR of summed unit-gain EDU outputs
Eigen::VectorXd zf_sinr(const CombinerSet& combiners, double power_mw, double noise_mw);

// gamma_k for arbitrary combiners on one realization:
// p_k |a_kk|^2 / (sum_{i != k} p_i |a_ki|^2 + sigma^2 sum_m ||v_{k,m}||^2)
// with a_ki = sum_m v_{k,m}^H h_{i,m}. Service restriction enters through
// combiner support (MMSE/MR vectors are zero outside their served antennas).
Eigen::VectorXd instantaneous_sinr(const CombinerSet& combiners,
                                   const std::vector<Eigen::MatrixXcd>& h_per_edu,
                                   const Eigen::VectorXd& power_mw, double noise_mw);

// per-UE regularized covariance solve on served antennas:
// v_k = p_k (sum_i p_i D_k hhat_i hhat_i^H D_k + sigma^2 I)^{-1} D_k hhat_k.
// masks[k] is UE k's 0/1 antenna mask for this EDU; UEs sharing a mask share
// the factorization.
Eigen::MatrixXcd mmse_combiner(const Eigen::MatrixXcd& h_hat_edu,
                               const std::vector<Eigen::VectorXd>& masks,
                               const Eigen::VectorXd& power_mw, double noise_mw);

// matched filter: v_k = D_k hhat_k
Eigen::MatrixXcd mr_combiner(const Eigen::MatrixXcd& h_hat_edu,
                             const std::vector<Eigen::VectorXd>& masks);

// dispatch on config.combiner for one EDU
Eigen::MatrixXcd build_combiner(const ScenarioConfig& config,
                                const Eigen::MatrixXcd& h_hat_edu,
                                const std::vector<Eigen::VectorXd>& masks, int edu_index);

// all EDUs at once from the stacked estimate matrix
CombinerSet build_combiners(const ScenarioConfig& config, const Partition& partition,
                            const AssociationMatrices& assoc,
                            const Eigen::MatrixXcd& h_hat);

// channel-hardening SINR: moments of the combined channel estimated by
// sample means over `draw` realizations
struct UatfResult {
  Eigen::VectorXd gamma;
  Eigen::VectorXd gamma_se;  // batch standard error (10 batches)
};

// draw(sample, h, h_hat) fills one realization; h_hat feeds the combiner, h
// carries the signal
using ChannelDraw =
    std::function<void(int sample, Eigen::MatrixXcd& h, Eigen::MatrixXcd& h_hat)>;

UatfResult uatf_sinr(const ChannelDraw& draw, int num_samples,
                     const ScenarioConfig& config, const Partition& partition,
                     const AssociationMatrices& assoc);

}  // namespace cfran
