#include "cfran/fbl.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfran {

namespace {

constexpr double kLog2e = 1.4426950408889634;  // log2(e)
constexpr double kLog2e2 = kLog2e * kLog2e;

// Wichura's AS241 (PPND16): standard normal quantile, ~1e-16 relative
double norm_quantile(double p) {
  double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0 ? -x : x;
}

double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

}  // namespace

double q_func(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

double q_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("q_inv: p must lie in (0, 1)");
  }
  // Q(x) = p  <=>  x = norm_quantile(1 - p) = -norm_quantile(p)
  double x = -norm_quantile(p);
  // two Newton refinements on Q(x) - p; derivative is -pdf(x)
  for (int i = 0; i < 2; ++i) {
    double pdf = norm_pdf(x);
    if (pdf <= std::numeric_limits<double>::min()) break;  // deep tail: polish would just divide by ~0
    x += (q_func(x) - p) / pdf;
  }
  return x;
}

double dispersion(double gamma) {
  if (gamma < 0.0) {
    throw std::domain_error("dispersion: SINR must be >= 0");
  }
  double s = 1.0 + gamma;
  return (1.0 - 1.0 / (s * s)) * kLog2e2;
}

double fbl_rate(double gamma, const FblParams& params) {
  double v = dispersion(gamma);
  if (params.bare_dispersion) v /= kLog2e2;
  double r = std::log2(1.0 + gamma) -
             std::sqrt(v / params.n) * q_inv(params.eps);
  return r > 0.0 ? r : 0.0;
}

FblResult sum_fbl_rate(const std::vector<double>& gammas, const FblParams& params) {
  FblResult out;
  out.per_ue_capacity.reserve(gammas.size());
  out.per_ue_rate.reserve(gammas.size());
  double sum_inv_sq = 0.0;
  for (double g : gammas) {
    if (g < 0.0) throw std::domain_error("sum_fbl_rate: SINR must be >= 0");
    double c = std::log2(1.0 + g);
    out.per_ue_capacity.push_back(c);
    out.per_ue_rate.push_back(fbl_rate(g, params));
    out.capacity += c;
    double s = 1.0 + g;
    sum_inv_sq += 1.0 / (s * s);
  }
  double k = static_cast<double>(gammas.size());
  out.dispersion = (k - sum_inv_sq) * (params.bare_dispersion ? 1.0 : kLog2e2);
  double r = out.capacity -
             std::sqrt(out.dispersion / params.n) * q_inv(params.eps);
  out.rate = r > 0.0 ? r : 0.0;
  return out;
}

double solve_error_prob(const std::vector<double>& gammas, double n,
                        double target_rate, bool bare_dispersion) {
  FblParams probe;  // eps is irrelevant here, only C and V are used
  probe.n = n;
  probe.bare_dispersion = bare_dispersion;
  FblResult base = sum_fbl_rate(gammas, probe);
  if (target_rate > base.capacity) {
    throw std::domain_error("solve_error_prob: target rate exceeds capacity, "
                            "unachievable even asymptotically");
  }
  if (base.dispersion <= 0.0) {
    return target_rate < base.capacity ? 0.0 : 0.5;
  }
  return q_func(std::sqrt(n / base.dispersion) * (base.capacity - target_rate));
}

}  // namespace cfran
