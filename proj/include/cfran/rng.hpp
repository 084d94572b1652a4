#pragma once
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace cfran {

// Counter-based substream derivation: (master_seed, trial_index, purpose_tag)
// is hashed into an independent mt19937_64 seed, so any trial can be computed
// on any worker in any order and still produce identical draws.
//
// Uniform and normal variates are generated by hand (53-bit mantissa mapping
// and Box-Muller) instead of std::uniform_real_distribution /
// std::normal_distribution, whose outputs are implementation-defined; byte
// reproducibility across standard libraries is part of the contract.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform on [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // one standard normal via Box-Muller; caches the paired variate
  double normal();

  // CN(0, 1): real and imaginary parts are N(0, 1/2)
  std::complex<double> cnormal() {
    return {normal() * M_SQRT1_2, normal() * M_SQRT1_2};
  }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trial_index,
                          std::string_view purpose_tag);

inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t trial_index,
                               std::string_view purpose_tag) {
  return RngStream(derive_seed(master_seed, trial_index, purpose_tag));
}

}  // namespace cfran
