#include "cfran/bounds.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

#include "cfran/errors.hpp"

namespace cfran {

namespace {

// surrogate SINRs feeding both the capacity and dispersion expressions:
// ub(i) = snr_i * sum of kept betas, lb(i) via the mean of the inverted-Gamma
// combiner-norm approximation
struct Surrogates {
  Eigen::VectorXd ub;
  Eigen::VectorXd lb;
  std::vector<std::vector<std::vector<int>>> exclusion;
};

Surrogates build_surrogates(const Eigen::MatrixXd& beta, const Partition& partition,
                            const Eigen::VectorXd& snr, bool need_lb) {
  const int num_ues = static_cast<int>(beta.rows());
  const int num_edus = static_cast<int>(partition.groups.size());
  if (snr.size() != num_ues) {
    throw std::invalid_argument("one SNR per UE required");
  }
  Surrogates s;
  s.ub.resize(num_ues);
  s.lb = Eigen::VectorXd::Zero(num_ues);
  s.exclusion.reserve(num_ues);
  for (int k = 0; k < num_ues; ++k) {
    s.exclusion.push_back(exclusion_set(beta, partition, k));
    double kept_sum = 0.0;
    double inv_mean_sum = 0.0;
    for (int m = 0; m < num_edus; ++m) {
      std::vector<double> kept;
      kept.reserve(s.exclusion[k][m].size());
      for (int l : s.exclusion[k][m]) kept.push_back(beta(k, l));
      for (double b : kept) kept_sum += b;
      if (!need_lb) continue;
      GammaParams g = gamma_params(kept);
      if (g.shape <= 1.0 + 1e-9) {
        throw DegenerateGeometry(
            "inverted-Gamma mean diverges for UE " + std::to_string(k) + " at EDU " +
            std::to_string(m) +
            " (exclusion set is a single RRU or one RRU dominates); increase the "
            "number of RRUs per EDU");
      }
      inv_mean_sum += 1.0 / (g.scale * (g.shape - 1.0));
    }
    s.ub(k) = snr(k) * kept_sum;
    if (need_lb) {
      s.lb(k) = snr(k) * num_edus * num_edus / inv_mean_sum;
    }
  }
  return s;
}

double capacity_sum(const Eigen::VectorXd& sinr) {
  double total = 0.0;
  for (int k = 0; k < sinr.size(); ++k) total += std::log2(1.0 + sinr(k));
  return total;
}

double dispersion_penalty(const Eigen::VectorXd& sinr, const FblParams& params) {
  double sum = 0.0;
  for (int k = 0; k < sinr.size(); ++k) {
    const double a = 1.0 + sinr(k);
    sum += 1.0 / (a * a);
  }
  const double joint = std::max(0.0, static_cast<double>(sinr.size()) - sum);
  const double unit = params.bare_dispersion ? 1.0 : std::numbers::log2e;
  return q_inv(params.eps) / std::sqrt(params.n) * unit * std::sqrt(joint);
}

}  // namespace

void check_bounds_supported(const ScenarioConfig& config) {
  if (config.antennas_per_rru != 1) {
    throw UnsupportedConfig(
        "closed-form SE bounds are derived for single-antenna RRUs; set "
        "antennas_per_rru = 1 (got " +
        std::to_string(config.antennas_per_rru) + ")");
  }
}

std::vector<std::vector<int>> exclusion_set(const Eigen::MatrixXd& beta,
                                            const Partition& partition, int ue) {
  const int num_ues = static_cast<int>(beta.rows());
  std::vector<std::vector<int>> result;
  result.reserve(partition.groups.size());
  for (size_t m = 0; m < partition.groups.size(); ++m) {
    const auto& group = partition.groups[m];
    std::set<int> removed;
    for (int j = 0; j < num_ues; ++j) {
      if (j == ue) continue;
      int best = group.front();
      for (int l : group) {
        if (beta(j, l) > beta(j, best)) best = l;
      }
      removed.insert(best);
    }
    std::vector<int> kept;
    for (int l : group) {
      if (!removed.count(l)) kept.push_back(l);
    }
    if (kept.empty()) {
      throw DegenerateGeometry("every RRU of EDU " + std::to_string(m) +
                               " is some other UE's strongest; no RRUs left for UE " +
                               std::to_string(ue));
    }
    result.push_back(std::move(kept));
  }
  return result;
}

GammaParams gamma_params(const std::vector<double>& beta_subset) {
  if (beta_subset.empty()) {
    throw std::invalid_argument("gamma_params needs a nonempty gain set");
  }
  double sum = 0.0, sum2 = 0.0;
  for (double b : beta_subset) {
    if (!(b > 0.0)) {
      throw std::invalid_argument("gamma_params needs strictly positive gains");
    }
    sum += b;
    sum2 += b * b;
  }
  return {sum * sum / sum2, sum2 / sum};
}

GammaParams gamma_sum_approx(const std::vector<GammaParams>& components) {
  if (components.empty()) {
    throw std::invalid_argument("gamma_sum_approx needs at least one component");
  }
  double mean = 0.0, var = 0.0;
  for (const auto& c : components) {
    if (!(c.shape > 0.0) || !(c.scale > 0.0)) {
      throw std::invalid_argument("gamma_sum_approx needs positive parameters");
    }
    mean += c.shape * c.scale;
    var += c.shape * c.scale * c.scale;
  }
  return {mean * mean / var, var / mean};
}

double x_upper(const Eigen::MatrixXd& beta, const Partition& partition,
               const Eigen::VectorXd& snr) {
  return capacity_sum(build_surrogates(beta, partition, snr, false).ub);
}

double x_lower(const Eigen::MatrixXd& beta, const Partition& partition,
               const Eigen::VectorXd& snr) {
  return capacity_sum(build_surrogates(beta, partition, snr, true).lb);
}

double y_upper(const Eigen::MatrixXd& beta, const Partition& partition,
               const Eigen::VectorXd& snr, const FblParams& params) {
  return dispersion_penalty(build_surrogates(beta, partition, snr, false).ub, params);
}

double y_lower(const Eigen::MatrixXd& beta, const Partition& partition,
               const Eigen::VectorXd& snr, const FblParams& params) {
  return dispersion_penalty(build_surrogates(beta, partition, snr, true).lb, params);
}

BoundResult se_bounds(const Eigen::MatrixXd& beta, const Partition& partition,
                      const Eigen::VectorXd& snr, const FblParams& params) {
  Surrogates s = build_surrogates(beta, partition, snr, true);
  BoundResult r;
  r.x_ub = capacity_sum(s.ub);
  r.x_lb = capacity_sum(s.lb);
  r.y_ub = dispersion_penalty(s.ub, params);
  r.y_lb = dispersion_penalty(s.lb, params);
  r.r_lb = std::max(0.0, r.x_lb - r.y_ub);
  // r_ub can sit below zero in deep-penalty regimes (tiny n, tiny SINR); the
  // unclamped pair still sandwiches the unclamped ergodic rate
  r.r_ub = r.x_ub - r.y_lb;
  r.exclusion = std::move(s.exclusion);
  if (r.y_lb > r.y_ub + 1e-12 || r.x_lb - r.y_ub > r.x_ub - r.y_lb + 1e-12) {
    throw std::logic_error("bound ordering violated; surrogate SINRs inconsistent");
  }
  return r;
}

double distance_se_lower(const Geometry& geometry, const Partition& partition, int ue,
                         double snr, double alpha) {
  const int num_ues = static_cast<int>(geometry.ue_rru_dist.rows());
  const int num_rrus = static_cast<int>(geometry.ue_rru_dist.cols());
  Eigen::MatrixXd beta(num_ues, num_rrus);
  for (int k = 0; k < num_ues; ++k) {
    for (int l = 0; l < num_rrus; ++l) {
      beta(k, l) = std::pow(geometry.ue_rru_dist(k, l), -alpha);
    }
  }
  auto sets = exclusion_set(beta, partition, ue);
  double gain = 0.0;
  for (const auto& kept : sets) {
    double d2 = 0.0;
    for (int l : kept) {
      const double d = geometry.ue_rru_dist(ue, l);
      d2 += d * d;
    }
    const double n = static_cast<double>(kept.size());
    gain += n * std::pow(d2 / n, -alpha / 2.0);
  }
  return std::log2(1.0 + snr * gain);
}

}  // namespace cfran
