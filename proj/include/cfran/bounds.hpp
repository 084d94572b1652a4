#pragma once
#include <vector>

#include <Eigen/Dense>

#include "cfran/association.hpp"
#include "cfran/fbl.hpp"
#include "cfran/scenario.hpp"

namespace cfran {

// moment-matched Gamma description of a summed channel gain
struct GammaParams {
  double shape = 0.0;  // (sum beta)^2 / sum beta^2, between 1 and the set size
  double scale = 0.0;  // sum beta^2 / sum beta, linear power
};

// closed-form sandwich on the ergodic finite-blocklength sum SE
struct BoundResult {
  double x_ub = 0.0;
  double x_lb = 0.0;
  double y_ub = 0.0;
  double y_lb = 0.0;
  double r_ub = 0.0;  // x_ub - y_lb
  double r_lb = 0.0;  // x_lb - y_ub, clamped at zero
  // exclusion[k][m] lists the RRUs of EDU m kept for UE k
  std::vector<std::vector<std::vector<int>>> exclusion;
};

// the derivation assumes single-antenna RRUs; reject anything else up front
void check_bounds_supported(const ScenarioConfig& config);

// EDU-m RRUs minus the deduplicated per-UE-strongest RRUs of every other UE
// (ties broken toward the lowest RRU index). beta is K x L.
std::vector<std::vector<int>> exclusion_set(const Eigen::MatrixXd& beta,
                                            const Partition& partition, int ue);

// parameters whose Gamma matches the mean (sum beta) and variance
// (sum beta^2) of a sum of independent exponential gains
GammaParams gamma_params(const std::vector<double>& beta_subset);

// moment-matched single Gamma for a sum of independent Gamma variables
GammaParams gamma_sum_approx(const std::vector<GammaParams>& components);

// snr holds per-UE p/sigma^2; all bound expressions are noise-normalized
double x_upper(const Eigen::MatrixXd& beta, const Partition& partition,
               const Eigen::VectorXd& snr);
double x_lower(const Eigen::MatrixXd& beta, const Partition& partition,
               const Eigen::VectorXd& snr);
double y_upper(const Eigen::MatrixXd& beta, const Partition& partition,
               const Eigen::VectorXd& snr, const FblParams& params);
double y_lower(const Eigen::MatrixXd& beta, const Partition& partition,
               const Eigen::VectorXd& snr, const FblParams& params);

BoundResult se_bounds(const Eigen::MatrixXd& beta, const Partition& partition,
                      const Eigen::VectorXd& snr, const FblParams& params);

// distance-only lower bound on the per-UE capacity upper bound under the
// free-space model: log2(1 + snr * sum_m n_m (mean d^2)^(-alpha/2)), tight
// when all kept RRUs of an EDU are equidistant
double distance_se_lower(const Geometry& geometry, const Partition& partition, int ue,
                         double snr, double alpha);

}  // namespace cfran
