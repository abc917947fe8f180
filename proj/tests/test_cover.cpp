#include <doctest.h>

#include <cmath>

#include "rotplace/cover.hpp"
#include "rotplace/lattice.hpp"
#include "rotplace/rng.hpp"
#include "rotplace/sampling.hpp"

using namespace rotplace;

TEST_CASE("cap cover covers the sphere with the stated distortion constant") {
  CapCover cover = build_cap_cover(0.35);
  CHECK(cover.theta == 0.35);
  CHECK(cover.m == doctest::Approx(std::cos(0.35)).epsilon(1e-15));
  CHECK(cover.size() > 0);
  for (const auto& c : cover.centers) CHECK(std::fabs(norm(c.v) - 1.0) < 1e-12);

  StreamRng rng(61, StreamTag::cover_check, 7);
  for (int i = 0; i < 20000; ++i) {
    UnitVector p = sample_sphere_point(rng);
    double best = kPi;
    for (const auto& c : cover.centers) best = std::min(best, angular_distance(p, c));
    CHECK(best <= cover.theta + 1e-12);
  }
}

TEST_CASE("finer covers need more caps") {
  int n_small = build_cap_cover(0.5).size();
  int n_mid = build_cap_cover(0.35).size();
  int n_big = build_cap_cover(0.2).size();
  CHECK(n_small < n_mid);
  CHECK(n_mid < n_big);
  CHECK_THROWS_AS(build_cap_cover(0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_cap_cover(kPi / 2), std::invalid_argument);
}

TEST_CASE("projection shrinks chords by at most the cover constant") {
  // independent check of the fact the validator is built on: inside a cap of
  // radius theta, orthogonal projection contracts distances by >= cos(theta)
  double theta = 0.3;
  UnitVector center(0.2, -0.5, 0.9);
  ProjectionFrame f = make_frame(center);
  StreamRng rng(67, StreamTag::distortion, 0);
  double worst = 1e9;
  for (int i = 0; i < 20000; ++i) {
    UnitVector a = sample_in_cap(center, theta, rng);
    UnitVector b = sample_in_cap(center, theta, rng);
    Planar pa = project_point(f, a), pb = project_point(f, b);
    double chord = std::sqrt(chord_sq(a.v, b.v));
    if (chord < 1e-9) continue;
    double planar = std::hypot(pa.x - pb.x, pa.y - pb.y);
    worst = std::min(worst, planar / chord);
  }
  CHECK(worst >= std::cos(theta));
}

TEST_CASE("distortion validator accepts the true constant") {
  CapCover cover = build_cap_cover(0.2);
  DistortionReport rep = validate_distortion(cover, 2000, 71);
  CHECK(rep.pass);
  CHECK(rep.violating_cap == -1);
  CHECK(rep.worst_chord_ratio >= 1.0);
  CHECK(rep.worst_area_margin > -4.0);
}

TEST_CASE("distortion validator rejects an inflated constant") {
  CapCover cover = build_cap_cover(0.2);
  DistortionReport rep = validate_distortion(cover, 2000, 71, std::cos(0.2) + 0.03);
  CHECK(!rep.pass);
  CHECK(rep.violating_cap >= 0);
  CHECK(rep.worst_chord_ratio < 1.0);
}
