#pragma once

#include "rotplace/geom.hpp"
#include "rotplace/mc.hpp"
#include "rotplace/region.hpp"
#include "rotplace/rng.hpp"

namespace rotplace {

// Uniform on the sphere: z uniform on [-1, 1], longitude uniform on [0, 2*pi).
// Exactly two draws per point, z first.
inline UnitVector sample_sphere_point(StreamRng& rng) {
  double z = rng.next_in(-1.0, 1.0);
  double phi = rng.next_in(0.0, kTwoPi);
  double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return UnitVector(Vec3{s * std::cos(phi), s * std::sin(phi), z});
}

// Uniform inside the closed cap of angular radius `radius` about `center`.
inline UnitVector sample_in_cap(const UnitVector& center, double radius, StreamRng& rng) {
  double z = rng.next_in(std::cos(radius), 1.0);
  double phi = rng.next_in(0.0, kTwoPi);
  double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  UnitVector e1 = any_orthogonal(center);
  UnitVector e2(cross(center.v, e1.v));
  return UnitVector(e1.v * (s * std::cos(phi)) + e2.v * (s * std::sin(phi)) + center.v * z);
}

inline Estimate estimate_region_area(const Region& region, std::uint64_t samples,
                                     const McConfig& cfg,
                                     StreamTag tag = StreamTag::sphere_area) {
  auto acc = run_streams<CountAcc>(cfg, tag, samples,
                                   [&](StreamRng& rng, std::uint64_t count, CountAcc& a) {
                                     for (std::uint64_t i = 0; i < count; ++i)
                                       a.add(region.contains(sample_sphere_point(rng)));
                                   });
  return acc.estimate();
}

enum class AreaMode { exact, monte_carlo };

struct UnsupportedExactArea : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact mode: closed form with stderr 0, or UnsupportedExactArea if the tree has
// no certified closed form. MC mode: membership rate over uniform sphere points.
inline Estimate region_area(const Region& region, AreaMode mode, std::uint64_t samples,
                            const McConfig& cfg) {
  if (mode == AreaMode::exact) {
    auto a = region.exact_area();
    if (!a)
      throw UnsupportedExactArea(
          "exact area unsupported for this tree; use monte_carlo mode");
    return Estimate{*a, 0.0, 0};
  }
  return estimate_region_area(region, samples, cfg);
}

}  // namespace rotplace
