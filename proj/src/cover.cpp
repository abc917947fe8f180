#include "rotplace/cover.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rotplace/sampling.hpp"

namespace rotplace {

namespace {

std::vector<UnitVector> spiral_points(int k) {
  std::vector<UnitVector> pts;
  pts.reserve(static_cast<std::size_t>(k));
  double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < k; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / k;
    double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden * i;
    pts.emplace_back(Vec3{s * std::cos(phi), s * std::sin(phi), z});
  }
  return pts;
}

}  // namespace

CapCover build_cap_cover(double theta) {
  if (!(theta > 0.0) || theta >= kPi / 2.0)
    throw std::invalid_argument("cover cap radius must be in (0, pi/2)");

  int k = static_cast<int>(std::ceil(3.0 / (1.0 - std::cos(theta)))) + 1;
  constexpr int kAttempts = 14;
  constexpr std::uint64_t kCheckPoints = 1000000;
  // Sample points must be covered with room to spare, so that the residual
  // uncovered area (if any) is far below what downstream consumers can see.
  double slack = std::min(5e-3, theta / 2.0);

  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    CapCover cover;
    cover.theta = theta;
    cover.m = std::cos(theta);
    cover.centers = spiral_points(k);

    CapSet idx;
    for (const auto& c : cover.centers) idx.add(Cap{c, theta});

    StreamRng rng(0x7eb1c0de5u, StreamTag::cover_check, static_cast<std::uint64_t>(attempt));
    bool ok = true;
    for (std::uint64_t i = 0; i < kCheckPoints && ok; ++i)
      if (!idx.covers(sample_sphere_point(rng), -slack)) ok = false;
    if (ok) return cover;
    k = static_cast<int>(std::ceil(k * 1.35)) + 1;
  }
  throw std::runtime_error("cap cover construction failed the sample check after retries");
}

DistortionReport validate_distortion(const CapCover& cover, std::uint64_t pair_samples,
                                     std::uint64_t seed, double m_override) {
  double m = m_override > 0.0 ? m_override : cover.m;
  DistortionReport rep;
  rep.pass = true;
  rep.worst_chord_ratio = std::numeric_limits<double>::infinity();
  rep.worst_area_margin = std::numeric_limits<double>::infinity();

  for (int i = 0; i < cover.size() && rep.pass; ++i) {
    const UnitVector& c = cover.centers[static_cast<std::size_t>(i)];
    UnitVector e1 = any_orthogonal(c);
    UnitVector e2(cross(c.v, e1.v));
    auto project = [&](const UnitVector& p) {
      return Vec3{dot(p.v, e1.v), dot(p.v, e2.v), 0.0};
    };

    StreamRng rng(seed, StreamTag::distortion, static_cast<std::uint64_t>(i));

    for (std::uint64_t s = 0; s < pair_samples; ++s) {
      UnitVector a = sample_in_cap(c, cover.theta, rng);
      UnitVector b = sample_in_cap(c, cover.theta, rng);
      double gap = norm(a.v - b.v);
      if (gap < 1e-6) continue;  // effectively equal points are excluded
      double pgap = norm(project(a) - project(b));
      double ratio = pgap / (m * gap);
      if (ratio < rep.worst_chord_ratio) rep.worst_chord_ratio = ratio;
      if (pgap <= m * gap) {
        rep.pass = false;
        rep.violating_cap = i;
        rep.violating_a = a.v;
        rep.violating_b = b.v;
        break;
      }
    }
    if (!rep.pass) break;

    // One random sub-cap per cover cap: spherical area and projected planar
    // area, both Monte Carlo, compared beyond 4 sigma.
    double rc = cover.theta * (0.2 + 0.6 * rng.next_double());
    UnitVector cc = sample_in_cap(c, cover.theta - rc, rng);
    constexpr std::uint64_t kSub = 5000;

    std::uint64_t sphere_hits = 0;
    // Spherical side: sample the parent cap, count sub-cap membership.
    for (std::uint64_t s = 0; s < kSub; ++s) {
      UnitVector p = sample_in_cap(c, cover.theta, rng);
      if (angular_distance(p, cc) <= rc) ++sphere_hits;
    }
    double parent_area = (1.0 - std::cos(cover.theta)) / 2.0;
    double p_s = static_cast<double>(sphere_hits) / kSub;
    double area_c = p_s * parent_area;
    double sd_c = parent_area * std::sqrt(std::max(0.0, p_s * (1.0 - p_s) / kSub));

    // Planar side: sample the bounding box of the projected sub-cap.
    Vec3 q0 = project(cc);
    double half = std::sin(rc) + 1e-12;
    double x0 = q0.x - half, y0 = q0.y - half;
    double box = (2.0 * half) * (2.0 * half);
    std::uint64_t plane_hits = 0;
    for (std::uint64_t s = 0; s < kSub; ++s) {
      double qx = x0 + 2.0 * half * rng.next_double();
      double qy = y0 + 2.0 * half * rng.next_double();
      double rr = qx * qx + qy * qy;
      if (rr > 1.0) continue;
      // Lift to the cap-side hemisphere and test sub-cap membership.
      Vec3 p = e1.v * qx + e2.v * qy + c.v * std::sqrt(1.0 - rr);
      if (angular_distance(UnitVector(p), cc) <= rc) ++plane_hits;
    }
    double p_p = static_cast<double>(plane_hits) / kSub;
    double area_p = p_p * box / (4.0 * kPi);  // planar area as a sphere fraction
    double sd_p = (box / (4.0 * kPi)) * std::sqrt(std::max(0.0, p_p * (1.0 - p_p) / kSub));

    double margin = area_p - m * area_c;
    double sd = std::sqrt(sd_p * sd_p + m * m * sd_c * sd_c);
    double z = sd > 0 ? margin / sd : (margin >= 0 ? 1e9 : -1e9);
    if (z < rep.worst_area_margin) rep.worst_area_margin = z;
    if (z < -4.0) {
      rep.pass = false;
      rep.violating_cap = i;
    }
  }
  return rep;
}

}  // namespace rotplace
