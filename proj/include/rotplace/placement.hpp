#pragma once

#include <optional>

#include "rotplace/geom.hpp"
#include "rotplace/haar.hpp"
#include "rotplace/mc.hpp"
#include "rotplace/pointset.hpp"
#include "rotplace/region.hpp"

namespace rotplace {

struct PlacementProblem {
  Region region;            // the open set the points must land in
  PointSet points;          // the set being rotated
  std::optional<double> area_hint;  // exact area of `region` if known
};

// Number of rotated points inside the region; n iff the whole rotated set fits.
int hit_count(const PlacementProblem& problem, const Rotation& x);

// Mean hit count over Haar rotations; converges to n * area(region).
Estimate expected_count(const PlacementProblem& problem, std::uint64_t samples,
                        const McConfig& cfg);

struct MeasureResult {
  Estimate estimate;    // fraction of rotations placing all n points inside
  double lower_bound = 0.0;  // max(0, n*A - (n-1)), clamped to [0,1]
};

MeasureResult good_rotation_measure(const PlacementProblem& problem, std::uint64_t samples,
                                    const McConfig& cfg);

// The analytic bound alone, using area_hint, then exact area, then a
// conservative MC estimate (mean minus 4 standard errors).
double placement_lower_bound(const PlacementProblem& problem, const McConfig& cfg);

enum class PlacementStatus { found, not_found };

struct PlacementResult {
  PlacementStatus status = PlacementStatus::not_found;
  std::optional<Rotation> rotation;
  std::uint64_t samples_used = 0;  // prefix position of the first success in
                                   // (stream, sample) order; budget if none
  Estimate good_measure;           // success fraction over the full budget
  double lower_bound = 0.0;
  int best_hits = 0;               // best hit count seen (diagnostic)
  bool refined = false;            // success came from local refinement
};

// Rejection-samples Haar rotations over the full budget; the reported success is
// the lexicographically first (stream index, sample index) hit. With refine on,
// a failed search hill-climbs from the best-seen rotation over shrinking
// perturbation angles (pi/4, pi/8, ..., down to 1e-4 rad). Deterministic for
// fixed (seed, streams).
PlacementResult find_placement(const PlacementProblem& problem, std::uint64_t budget,
                               const McConfig& cfg, bool refine = true);

struct AdversarialResult {
  int min_hits = 0;
  Rotation witness;
  std::uint64_t evaluations = 0;
};

// Numeric search for the rotation minimizing how many points land in the closed
// obstruction; min_hits >= 1 everywhere is evidence (not proof) that the
// obstruction's complement admits no placement.
AdversarialResult adversarial_min_search(const Region& obstruction, const PointSet& points,
                                         int grid, int refine_steps, std::uint64_t seed);

}  // namespace rotplace
