#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rotplace/geom.hpp"
#include "rotplace/index.hpp"
#include "rotplace/rng.hpp"

namespace rotplace {

// Finite family of equal-radius caps covering the whole sphere; m is the
// distortion constant guaranteed by orthogonal projection onto each cap's
// equatorial plane (m = cos theta).
struct CapCover {
  double theta = 0.0;
  double m = 0.0;
  std::vector<UnitVector> centers;

  int size() const { return static_cast<int>(centers.size()); }
};

// Builds a spiral-lattice cover of caps with angular radius theta, growing the
// count until a 10^5-point sample check finds no uncovered point. Throws
// std::invalid_argument for theta outside (0, pi/2) and std::runtime_error if
// the check cannot be satisfied after retries.
CapCover build_cap_cover(double theta);

struct DistortionReport {
  bool pass = false;
  int violating_cap = -1;
  Vec3 violating_a{}, violating_b{};
  double worst_chord_ratio = 0.0;  // min over sampled pairs of |proj gap| / (m |gap|)
  double worst_area_margin = 0.0;  // min over caps of (proj area - m * area) / stderr
};

// Checks the two projection-distortion properties cap by cap: sampled chord
// pairs satisfy |pi(A)pi(B)| > m_used * |AB|, and sampled sub-cap areas satisfy
// the corresponding area inequality beyond 4 sigma. m_override > 0 replaces the
// cover's own constant (used to demonstrate failure for m > cos theta).
DistortionReport validate_distortion(const CapCover& cover, std::uint64_t pair_samples,
                                     std::uint64_t seed, double m_override = -1.0);

}  // namespace rotplace
