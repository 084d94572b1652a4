#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cfran/fbl.hpp"

using namespace cfran;

namespace {
constexpr double kLog2e2 = 2.0813689810056077;  // log2(e)^2
}

TEST_CASE("q_func basics") {
  CHECK(q_func(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(q_func(40.0) < 1e-300);
  // Q(-x) + Q(x) = 1
  CHECK(q_func(-1.3) + q_func(1.3) == doctest::Approx(1.0).epsilon(1e-14));
  // reference value from scipy.special.ndtr
  CHECK(q_func(4.7534243088229) == doctest::Approx(1e-6).epsilon(1e-12));
}

TEST_CASE("q_inv against scipy.special.ndtri reference values") {
  CHECK(q_inv(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(q_inv(1e-9) == doctest::Approx(5.99780701500769).epsilon(1e-12));
  CHECK(q_inv(1e-6) == doctest::Approx(4.75342430882290).epsilon(1e-12));
  CHECK(q_inv(1e-5) == doctest::Approx(4.26489079392282).epsilon(1e-12));
  CHECK(q_inv(1e-3) == doctest::Approx(3.09023230616781).epsilon(1e-12));
  CHECK(q_inv(0.4) == doctest::Approx(0.25334710313580).epsilon(1e-12));
  // negative branch for p > 0.5
  CHECK(q_inv(0.6) == doctest::Approx(-0.25334710313580).epsilon(1e-12));
}

TEST_CASE("q round trip") {
  for (double p : {1e-9, 1e-6, 1e-3, 0.4, 0.5, 0.9}) {
    CHECK(q_func(q_inv(p)) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK_THROWS_AS(q_inv(0.0), std::domain_error);
  CHECK_THROWS_AS(q_inv(1.0), std::domain_error);
  CHECK_THROWS_AS(q_inv(-0.1), std::domain_error);
}

TEST_CASE("dispersion limits and value") {
  CHECK(dispersion(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dispersion(1e12) == doctest::Approx(kLog2e2).epsilon(1e-9));
  CHECK(dispersion(1.0) == doctest::Approx(0.75 * kLog2e2).epsilon(1e-12));
  CHECK(dispersion(1.0) == doctest::Approx(1.56102673575).epsilon(1e-9));
  CHECK_THROWS_AS(dispersion(-0.1), std::domain_error);
  // strictly increasing
  double prev = -1.0;
  for (double g = 0.0; g < 20.0; g += 0.37) {
    double v = dispersion(g);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("fbl_rate reference points") {
  FblParams p;

  // eps = 0.5 removes the penalty entirely
  p.n = 7;
  p.eps = 0.5;
  CHECK(fbl_rate(1.0, p) == doctest::Approx(1.0).epsilon(1e-12));

  // long-block limit approaches Shannon capacity
  p.n = 1e12;
  p.eps = 1e-6;
  CHECK(fbl_rate(1.0, p) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(fbl_rate(1.0, p) == doctest::Approx(0.999994061021).epsilon(1e-9));

  // frozen from the q_inv/dispersion reference arithmetic:
  // 1 - sqrt(1.56102673575/100)*4.26489079392282
  p.n = 100;
  p.eps = 1e-5;
  CHECK(fbl_rate(1.0, p) == doctest::Approx(0.467140042477).epsilon(1e-9));

  // clamped at zero for tiny blocks
  p.n = 1;
  p.eps = 1e-9;
  CHECK(fbl_rate(0.3, p) == 0.0);
}

TEST_CASE("fbl_rate monotonicity grids") {
  FblParams p;
  p.eps = 1e-5;
  // nondecreasing in n
  double prev = -1.0;
  for (double n : {1.0, 2.0, 5.0, 10.0, 50.0, 200.0, 1e4}) {
    p.n = n;
    double r = fbl_rate(2.0, p);
    CHECK(r >= prev);
    prev = r;
  }
  // nondecreasing in eps on (0, 0.5]
  p.n = 64;
  prev = -1.0;
  for (double e : {1e-9, 1e-6, 1e-3, 0.1, 0.5}) {
    p.eps = e;
    double r = fbl_rate(2.0, p);
    CHECK(r >= prev);
    prev = r;
  }
  // nondecreasing in gamma
  p.eps = 1e-5;
  prev = -1.0;
  for (double g = 0.0; g < 100.0; g += 3.1) {
    double r = fbl_rate(g, p);
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("sum_fbl_rate joint form") {
  FblParams p;
  p.n = 100;
  p.eps = 1e-5;

  // two units of SINR 1: C = 2, V = 1.5*log2(e)^2, all frozen via the same
  // reference arithmetic as fbl_rate
  FblResult r = sum_fbl_rate({1.0, 1.0}, p);
  CHECK(r.capacity == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.dispersion == doctest::Approx(1.5 * kLog2e2).epsilon(1e-12));
  CHECK(r.dispersion == doctest::Approx(3.1220534715084116).epsilon(1e-12));
  CHECK(r.rate == doctest::Approx(1.2464222212254317).epsilon(1e-12));

  // all-zero SINRs
  FblResult z = sum_fbl_rate({0.0, 0.0, 0.0}, p);
  CHECK(z.capacity == 0.0);
  CHECK(z.dispersion == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(z.rate == 0.0);

  // eps = 0.5 returns the Shannon sum
  p.eps = 0.5;
  FblResult s = sum_fbl_rate({1.0, 3.0}, p);
  CHECK(s.rate == doctest::Approx(s.capacity).epsilon(1e-12));

  // K = 1 joint form is exactly the per-user formula
  p.eps = 2e-4;
  p.n = 37;
  for (double g : {0.0, 0.5, 4.0, 1e5}) {
    FblResult one = sum_fbl_rate({g}, p);
    CHECK(one.rate == doctest::Approx(fbl_rate(g, p)).epsilon(1e-14));
  }
}

TEST_CASE("bare dispersion compatibility mode") {
  FblParams p;
  p.n = 100;
  p.eps = 1e-5;
  p.bare_dispersion = true;
  FblResult r = sum_fbl_rate({1.0, 1.0}, p);
  CHECK(r.dispersion == doctest::Approx(1.5).epsilon(1e-12));
  // the bare penalty is smaller by exactly log2(e)
  FblParams q = p;
  q.bare_dispersion = false;
  FblResult rq = sum_fbl_rate({1.0, 1.0}, q);
  double pen_bare = r.capacity - r.rate;
  double pen_full = rq.capacity - rq.rate;
  CHECK(pen_full / pen_bare == doctest::Approx(std::sqrt(kLog2e2)).epsilon(1e-12));
}

TEST_CASE("solve_error_prob inversion") {
  std::vector<double> g{1.0, 1.0};

  // target at capacity: penalty is zero, eps = 0.5
  CHECK(solve_error_prob(g, 100, 2.0) == doctest::Approx(0.5).epsilon(1e-12));

  // round trip through sum_fbl_rate
  FblParams p;
  p.n = 100;
  p.eps = 1e-5;
  FblResult r = sum_fbl_rate(g, p);
  CHECK(solve_error_prob(g, 100, r.rate) == doctest::Approx(1e-5).epsilon(1e-9));
  CHECK(solve_error_prob(g, 100, 1.2464222212254317) ==
        doctest::Approx(1e-5).epsilon(1e-9));

  // degenerate dispersion: all SINRs zero
  CHECK(solve_error_prob({0.0}, 50, 0.0) == 0.5);

  // unreachable target
  CHECK_THROWS_AS(solve_error_prob(g, 100, 2.5), std::domain_error);

  // strictly decreasing in n below capacity
  double prev = 1.0;
  for (double n : {10.0, 20.0, 50.0, 100.0, 400.0}) {
    double e = solve_error_prob(g, n, 1.5);
    CHECK(e < prev);
    prev = e;
  }

  // round trip in the bare-dispersion convention too
  p.bare_dispersion = true;
  FblResult rb = sum_fbl_rate(g, p);
  CHECK(solve_error_prob(g, 100, rb.rate, true) ==
        doctest::Approx(1e-5).epsilon(1e-9));
}
