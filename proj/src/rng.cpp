#include "cfran/rng.hpp"

#include <cmath>

namespace cfran {

namespace {

// SplitMix64 finalizer; good avalanche, cheap, stable across platforms
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trial_index,
                          std::string_view purpose_tag) {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ mix64(trial_index + 0x51ed270b0f4dull));
  h = mix64(h ^ fnv1a(purpose_tag));
  return h;
}

double RngStream::normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  // Box-Muller on (0,1] uniforms; u1 > 0 guaranteed by the +1 offset
  double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  cached_ = r * std::sin(a);
  have_cached_ = true;
  return r * std::cos(a);
}

std::uint64_t RngStream::below(std::uint64_t n) {
  // rejection sampling to avoid modulo bias
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = eng_();
  } while (x >= limit);
  return x % n;
}

}  // namespace cfran
