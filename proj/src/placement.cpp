#include "rotplace/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rotplace/sampling.hpp"

namespace rotplace {

int hit_count(const PlacementProblem& problem, const Rotation& x) {
  int hits = 0;
  for (const auto& a : problem.points.points)
    if (problem.region.contains(x.apply(a))) ++hits;
  return hits;
}

Estimate expected_count(const PlacementProblem& problem, std::uint64_t samples,
                        const McConfig& cfg) {
  auto acc = run_streams<MomentAcc>(
      cfg, StreamTag::expected_count, samples,
      [&](StreamRng& rng, std::uint64_t count, MomentAcc& a) {
        for (std::uint64_t i = 0; i < count; ++i)
          a.add(static_cast<double>(hit_count(problem, sample_haar(rng))));
      });
  return acc.estimate();
}

double placement_lower_bound(const PlacementProblem& problem, const McConfig& cfg) {
  int n = problem.points.n();
  double area;
  if (problem.area_hint) {
    area = *problem.area_hint;
  } else if (auto exact = problem.region.exact_area()) {
    area = *exact;
  } else {
    Estimate e = estimate_region_area(problem.region, 200000, cfg);
    area = e.value - 4.0 * e.std_error;  // conservative when only sampled
  }
  double bound = n * area - (n - 1);
  return std::clamp(bound, 0.0, 1.0);
}

MeasureResult good_rotation_measure(const PlacementProblem& problem, std::uint64_t samples,
                                    const McConfig& cfg) {
  int n = problem.points.n();
  auto acc = run_streams<CountAcc>(cfg, StreamTag::good_measure, samples,
                                   [&](StreamRng& rng, std::uint64_t count, CountAcc& a) {
                                     for (std::uint64_t i = 0; i < count; ++i)
                                       a.add(hit_count(problem, sample_haar(rng)) == n);
                                   });
  MeasureResult r;
  r.estimate = acc.estimate();
  r.lower_bound = placement_lower_bound(problem, cfg);
  return r;
}

namespace {

constexpr std::uint64_t kNoIndex = std::numeric_limits<std::uint64_t>::max();

// Per-stream search record, merged in ascending stream order so the adopted
// success/best-seen is the lexicographically first (stream, sample index).
struct PlaceAcc {
  std::uint64_t samples = 0;
  std::uint64_t full_hits = 0;        // samples with hit_count == n
  std::uint64_t success_idx = kNoIndex;  // within-stream index before merge
  Rotation success_rot;
  int best_hits = -1;
  std::uint64_t best_idx = kNoIndex;
  Rotation best_rot;
  bool found() const { return success_idx != kNoIndex; }

  void merge(const PlaceAcc& o) {
    if (!found() && o.found()) {
      success_idx = samples + o.success_idx;
      success_rot = o.success_rot;
    }
    if (o.best_hits > best_hits) {
      best_hits = o.best_hits;
      best_idx = samples + o.best_idx;
      best_rot = o.best_rot;
    }
    samples += o.samples;
    full_hits += o.full_hits;
  }
};

}  // namespace

PlacementResult find_placement(const PlacementProblem& problem, std::uint64_t budget,
                               const McConfig& cfg, bool refine) {
  if (budget < 1) throw std::invalid_argument("placement budget must be at least 1");
  int n = problem.points.n();
  if (n < 1) throw std::invalid_argument("placement needs a non-empty point set");

  auto acc = run_streams<PlaceAcc>(
      cfg, StreamTag::placement, budget,
      [&](StreamRng& rng, std::uint64_t count, PlaceAcc& a) {
        a.samples = count;
        for (std::uint64_t i = 0; i < count; ++i) {
          Rotation x = sample_haar(rng);
          int h = hit_count(problem, x);
          if (h == n) ++a.full_hits;
          if (h > a.best_hits) {
            a.best_hits = h;
            a.best_idx = i;
            a.best_rot = x;
          }
          if (h == n && a.success_idx == kNoIndex) {
            a.success_idx = i;
            a.success_rot = x;
          }
        }
      });

  PlacementResult r;
  CountAcc counts;
  counts.hits = acc.full_hits;
  counts.n = acc.samples;
  r.good_measure = counts.estimate();
  r.lower_bound = placement_lower_bound(problem, cfg);
  r.best_hits = std::max(acc.best_hits, 0);

  if (acc.found()) {
    r.status = PlacementStatus::found;
    r.rotation = acc.success_rot;
    r.samples_used = acc.success_idx + 1;
    return r;
  }

  r.samples_used = acc.samples;
  if (refine && acc.best_hits >= 0) {
    StreamRng rng(cfg.seed, StreamTag::refine, 0);
    Rotation current = acc.best_rot;
    int current_hits = acc.best_hits;
    for (double angle = kPi / 4.0; angle >= 1e-4 && current_hits < n; angle /= 2.0) {
      for (int probe = 0; probe < 32 && current_hits < n; ++probe) {
        UnitVector axis = sample_sphere_point(rng);
        Rotation candidate = rotation_from_axis_angle(axis, angle).compose(current);
        int h = hit_count(problem, candidate);
        if (h > current_hits) {
          current_hits = h;
          current = candidate;
        }
      }
    }
    r.best_hits = current_hits;
    if (current_hits == n) {
      r.status = PlacementStatus::found;
      r.rotation = current;
      r.refined = true;
    }
  }
  return r;
}

AdversarialResult adversarial_min_search(const Region& obstruction, const PointSet& points,
                                         int grid, int refine_steps, std::uint64_t seed) {
  if (grid < 1) grid = 1;
  PlacementProblem prob{obstruction, points, std::nullopt};
  int n = points.n();

  AdversarialResult best;
  best.min_hits = n + 1;
  auto consider = [&](const Rotation& x) {
    int h = hit_count(prob, x);
    ++best.evaluations;
    if (h < best.min_hits) {
      best.min_hits = h;
      best.witness = x;
    }
  };

  consider(Rotation::identity());
  // Coarse net: Fibonacci-spiral axes crossed with evenly spaced angles.
  double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < grid; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / grid;
    double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden * i;
    UnitVector axis(Vec3{s * std::cos(phi), s * std::sin(phi), z});
    for (int j = 1; j <= grid; ++j) consider(rotation_from_axis_angle(axis, kTwoPi * j / (grid + 1)));
  }

  StreamRng rng(seed, StreamTag::adversarial, 0);
  double angle = kPi / 8.0;
  for (int step = 0; step < refine_steps && best.min_hits > 0; ++step) {
    bool improved = false;
    for (int probe = 0; probe < 64; ++probe) {
      UnitVector axis = sample_sphere_point(rng);
      Rotation candidate = rotation_from_axis_angle(axis, angle).compose(best.witness);
      int h = hit_count(prob, candidate);
      ++best.evaluations;
      if (h < best.min_hits) {
        best.min_hits = h;
        best.witness = candidate;
        improved = true;
      }
    }
    if (!improved) angle = std::max(angle / 2.0, 1e-4);
  }
  if (best.min_hits > n) best.min_hits = n;  // empty net fallback
  return best;
}

}  // namespace rotplace
