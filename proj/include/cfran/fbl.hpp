#pragma once
#include <vector>

namespace cfran {

// Finite-blocklength normal approximation:
//   R = log2(1+g) - sqrt(V/n) * Qinv(eps),  V = (1 - (1+g)^-2) * log2(e)^2
// and the K-user joint form with V = (K - sum (1+g_i)^-2) * log2(e)^2.
//
// `bare_dispersion` drops the log2(e)^2 factor from V. Some published plots
// use that bare variance inside the penalty; the default keeps the factor so
// the K=1 joint form reduces exactly to the per-user formula.

struct FblParams {
  double n = 100;       // block length, symbols
  double eps = 1e-5;    // target error probability, (0, 0.5]
  bool bare_dispersion = false;
};

struct FblResult {
  double capacity = 0;    // sum log2(1+g), bits/s/Hz
  double dispersion = 0;  // joint V across users
  double rate = 0;        // capacity - penalty, clamped at 0
  std::vector<double> per_ue_capacity;
  std::vector<double> per_ue_rate;  // per-user normal approximation, clamped
};

// upper tail of the standard normal, Q(x) = P(Z > x)
double q_func(double x);

// inverse of q_func on (0, 1); Q(q_inv(p)) = p to ~1e-15 relative
double q_inv(double p);

// single-user channel dispersion, V(g) in bits^2
double dispersion(double gamma);

double fbl_rate(double gamma, const FblParams& params);

FblResult sum_fbl_rate(const std::vector<double>& gammas, const FblParams& params);

// algebraic inversion of the joint form: the eps at which `target_rate` is the
// achievable sum rate; round-trips with sum_fbl_rate
double solve_error_prob(const std::vector<double>& gammas, double n,
                        double target_rate, bool bare_dispersion = false);

}  // namespace cfran
