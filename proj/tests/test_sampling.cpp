#include <doctest.h>

#include <cmath>

#include "rotplace/region.hpp"
#include "rotplace/rng.hpp"
#include "rotplace/sampling.hpp"

using namespace rotplace;

TEST_CASE("stream rng is reproducible and stream-separated") {
  StreamRng a(99, StreamTag::sphere_area, 0);
  StreamRng b(99, StreamTag::sphere_area, 0);
  for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());

  StreamRng c(99, StreamTag::sphere_area, 1);
  StreamRng d(99, StreamTag::haar, 0);
  StreamRng e(100, StreamTag::sphere_area, 0);
  StreamRng base(99, StreamTag::sphere_area, 0);
  std::uint64_t x = base.next_u64();
  CHECK(c.next_u64() != x);
  CHECK(d.next_u64() != x);
  CHECK(e.next_u64() != x);
}

TEST_CASE("uniform doubles stay in range") {
  StreamRng rng(1, StreamTag::sphere_area, 2);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    double v = rng.next_in(-2.0, 3.0);
    CHECK(v >= -2.0);
    CHECK(v < 3.0);
  }
}

TEST_CASE("sphere sampling consumes exactly two draws, z first") {
  StreamRng a(5, StreamTag::sphere_area, 3);
  StreamRng b(5, StreamTag::sphere_area, 3);
  for (int i = 0; i < 50; ++i) {
    UnitVector p = sample_sphere_point(a);
    double z = b.next_in(-1.0, 1.0);
    double phi = b.next_in(0.0, kTwoPi);
    // The constructor renormalizes, so components match only to an ulp.
    CHECK(p.z() == doctest::Approx(z).epsilon(1e-15));
    double s = std::sqrt(1.0 - z * z);
    CHECK(p.x() == doctest::Approx(s * std::cos(phi)).epsilon(1e-15));
  }
  // Both streams sit at the same position: exactly two draws were consumed.
  CHECK(a.next_double() == b.next_double());
}

TEST_CASE("sphere sampling matches known region masses") {
  StreamRng rng(7, StreamTag::sphere_area, 0);
  const int n = 200000;
  Region hemi = Region::hemisphere(UnitVector(0.3, -0.5, 0.8), Boundary::closed);
  Region cap = Region::cap(UnitVector(1, 0, 0), 0.6, Boundary::closed);
  int in_h = 0, in_c = 0;
  double sz = 0;
  for (int i = 0; i < n; ++i) {
    UnitVector p = sample_sphere_point(rng);
    in_h += hemi.contains(p) ? 1 : 0;
    in_c += cap.contains(p) ? 1 : 0;
    sz += p.z();
  }
  double se_h = std::sqrt(0.25 / n);
  CHECK(std::fabs(in_h / double(n) - 0.5) <= 4 * se_h);
  double a = cap_area(0.6);
  double se_c = std::sqrt(a * (1 - a) / n);
  CHECK(std::fabs(in_c / double(n) - a) <= 4 * se_c);
  CHECK(std::fabs(sz / n) <= 4 * std::sqrt(1.0 / 3.0 / n));  // E[z^2] = 1/3
}

TEST_CASE("cap sampling lands inside and is uniform within") {
  StreamRng rng(11, StreamTag::sphere_area, 1);
  for (double r : {0.15, 0.7, kPi / 2}) {
    UnitVector center(0.4, 0.8, -0.3);
    int inner = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
      UnitVector p = sample_in_cap(center, r, rng);
      CHECK(angular_distance(p, center) <= r + 1e-12);
      inner += angular_distance(p, center) <= r / 2 ? 1 : 0;
    }
    double frac = cap_area(r / 2) / cap_area(r);
    double se = std::sqrt(frac * (1 - frac) / n);
    CHECK(std::fabs(inner / double(n) - frac) <= 4 * se);
  }
}

TEST_CASE("area estimator agrees with closed forms") {
  McConfig cfg;
  cfg.seed = 2024;
  for (auto [reg, exact] :
       {std::pair{Region::cap(UnitVector(0, 1, 0), 0.9, Boundary::closed), cap_area(0.9)},
        std::pair{Region::lune(UnitVector(0, 0, 1), 0.3, 1.1, Boundary::closed),
                  lune_area(1.1)},
        std::pair{Region::complement(Region::cap(UnitVector(0, 0, 1), std::acos(0.6),
                                                 Boundary::closed)),
                  0.8}}) {
    Estimate e = estimate_region_area(reg, 200000, cfg);
    CHECK(e.samples == 200000);
    CHECK(e.std_error == doctest::Approx(std::sqrt(e.value * (1 - e.value) / 200000)));
    CHECK(std::fabs(e.value - exact) <= 4 * e.std_error);
  }
}

TEST_CASE("exact mode returns the closed form or refuses") {
  McConfig cfg;
  Region cap = Region::cap(UnitVector(0, 0, 1), 0.4, Boundary::open);
  Estimate e = region_area(cap, AreaMode::exact, 0, cfg);
  CHECK(e.value == doctest::Approx(cap_area(0.4)).epsilon(1e-15));
  CHECK(e.std_error == 0.0);

  Region blob = Region::union_of({Region::cap(UnitVector(0, 0, 1), 0.5, Boundary::closed),
                                  Region::cap(UnitVector(0.1, 0, 1), 0.5, Boundary::closed)});
  CHECK_THROWS_AS(region_area(blob, AreaMode::exact, 0, cfg), UnsupportedExactArea);
  Estimate mc = region_area(blob, AreaMode::monte_carlo, 50000, cfg);
  CHECK(mc.samples == 50000);
  CHECK(mc.value > cap_area(0.5));  // union strictly exceeds one cap
}

TEST_CASE("accumulator arithmetic on frozen counts") {
  CountAcc c;
  c.add(true);
  c.add(false);
  c.add(true);
  Estimate e = c.estimate();
  CHECK(e.value == doctest::Approx(2.0 / 3.0));
  CHECK(e.std_error == doctest::Approx(std::sqrt((2.0 / 3.0) * (1.0 / 3.0) / 3.0)));

  CountAcc d;
  d.add(true);
  c.merge(d);
  CHECK(c.estimate().value == doctest::Approx(3.0 / 4.0));

  MomentAcc m;
  for (double x : {1.0, 2.0, 3.0, 6.0}) m.add(x);
  Estimate me = m.estimate();
  CHECK(me.value == doctest::Approx(3.0));
  CHECK(me.std_error == doctest::Approx(std::sqrt((14.0 / 3.0) / 4.0)));  // var = 14/3
}
