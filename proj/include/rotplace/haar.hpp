#pragma once

#include <cstdint>
#include <functional>

#include "rotplace/geom.hpp"
#include "rotplace/region.hpp"
#include "rotplace/rng.hpp"

namespace rotplace {

// Uniform rotation from three uniform draws (u1, u2, u3) mapped through the
// subgroup-algorithm quaternion construction. Exactly three draws per rotation.
inline Rotation sample_haar(StreamRng& rng) {
  double u1 = rng.next_double();
  double u2 = rng.next_double();
  double u3 = rng.next_double();
  double r1 = std::sqrt(1.0 - u1), r2 = std::sqrt(u1);
  double t1 = kTwoPi * u2, t2 = kTwoPi * u3;
  double x = r1 * std::sin(t1), y = r1 * std::cos(t1);
  double z = r2 * std::sin(t2), w = r2 * std::cos(t2);
  return rotation_from_quaternion(w, x, y, z);
}

// Reproducible stream of Haar-uniform rotations; identical (seed, stream_index)
// gives an identical sequence.
class HaarStream {
 public:
  HaarStream(std::uint64_t seed, std::uint64_t stream_index)
      : seed_(seed), stream_index_(stream_index), rng_(seed, StreamTag::haar, stream_index) {}

  Rotation next() { return sample_haar(rng_); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_index_;
  StreamRng rng_;
};

using RotationSampler = std::function<Rotation(StreamRng&)>;

// Test fixture: shrinks every rotation angle toward zero, which destroys
// uniformity of the pushforward while keeping outputs valid rotations.
inline Rotation sample_biased_toward_identity(StreamRng& rng) {
  Rotation r = sample_haar(rng);
  double ang = r.angle();
  if (ang < 1e-12) return r;
  Vec3 ax{r.m[7] - r.m[5], r.m[2] - r.m[6], r.m[3] - r.m[1]};
  if (norm(ax) < 1e-12) return Rotation::identity();
  return rotation_from_axis_angle(UnitVector(ax), 0.5 * ang);
}

struct InvarianceResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  double probe_area = 0.0;
  bool pass = false;
};

// Chi-square check that the pushforward x(a) hits `probe` at rate area(probe)
// for several fixed base points a. Fails at significance level 0.001 when the
// sampler is not rotation invariant. Throws std::invalid_argument for a probe
// of area 0 or 1.
InvarianceResult invariance_test(std::uint64_t seed, std::uint64_t stream_index,
                                 const Region& probe, std::uint64_t trials,
                                 int base_points = 5,
                                 const RotationSampler& sampler = RotationSampler(sample_haar));

}  // namespace rotplace
