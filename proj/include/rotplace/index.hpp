#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "rotplace/geom.hpp"

namespace rotplace {

struct Cap {
  UnitVector center;
  double radius = 0.0;  // angular radius
};

// Angular threshold tests done in chord space: angular(p,c) <= a  iff
// |p-c| <= 2*sin(a/2). The comparison is exact and branch-free of trig noise.
inline double chord_of_angle(double a) { return 2.0 * std::sin(std::min(a, kPi) / 2.0); }

inline double chord_sq(const Vec3& a, const Vec3& b) {
  Vec3 d = a - b;
  return dot(d, d);
}

// Hash-grid index over caps, banded by radius so both "point inside some cap"
// and "new cap would overlap some cap" queries stay near O(1). Used for exact
// disjointness checks, hole membership, and coverage tests.
class CapSet {
 public:
  void add(const Cap& c) {
    int b = band_of(c.radius);
    auto [it, inserted] = bands_.try_emplace(b, Band(cell_for_band(b)));
    (void)inserted;
    Band& band = it->second;
    if (c.radius > band.r_max) band.r_max = c.radius;
    caps_.push_back(c);
    band.insert_position(*this, caps_.size() - 1);
  }

  std::size_t size() const { return caps_.size(); }
  const std::vector<Cap>& caps() const { return caps_; }

  // Is p within (radius + slack) of some cap center? Non-strict comparison.
  bool covers(const UnitVector& p, double slack) const {
    for (const auto& [b, band] : bands_) {
      double q = chord_of_angle(band.r_max + slack);
      bool hit = false;
      band.scan(*this, p.v, q, [&](std::uint32_t, const Cap& c) {
        if (chord_sq(p.v, c.center.v) <= sq(chord_of_angle(c.radius + slack))) hit = true;
        return hit;
      });
      if (hit) return true;
    }
    return false;
  }

  // Would a new cap (p, r_new) come within `gap` of overlapping an existing cap?
  bool blocks(const UnitVector& p, double r_new, double gap) const {
    return first_blocking(p, r_new, gap) >= 0;
  }

  // Index of some existing cap that the new cap (p, r_new) would overlap
  // (within gap), or -1. Deterministic: the lowest such index.
  long first_blocking(const UnitVector& p, double r_new, double gap) const {
    long found = -1;
    for (const auto& [b, band] : bands_) {
      double q = chord_of_angle(band.r_max + r_new + gap);
      band.scan(*this, p.v, q, [&](std::uint32_t idx, const Cap& c) {
        if (chord_sq(p.v, c.center.v) < sq(chord_of_angle(c.radius + r_new + gap)))
          if (found < 0 || idx < found) found = idx;
        return false;
      });
    }
    return found;
  }

  // Largest radius a new cap at p could have without touching any existing
  // cap, clipped to cap_at. Returns a nonpositive value when p is inside or
  // on some cap (not necessarily the exact depth). Visits large-cap bands
  // first: every hit shrinks the scan radius for the finer bands, where wide
  // cell walks would otherwise dominate.
  double min_clearance(const UnitVector& p, double cap_at) const {
    double best = cap_at;
    int keys[16];
    int nk = 0;
    for (const auto& [b, band] : bands_) keys[nk++] = b;
    std::sort(keys, keys + nk, std::greater<int>());
    for (int i = 0; i < nk && best > 0.0; ++i) {
      const Band& band = bands_.at(keys[i]);
      double q = chord_of_angle(band.r_max + best);
      band.scan(*this, p.v, q, [&](std::uint32_t, const Cap& c) {
        double half = 0.5 * std::sqrt(chord_sq(p.v, c.center.v));
        double ang = 2.0 * std::asin(std::clamp(half, 0.0, 1.0));
        best = std::min(best, ang - c.radius);
        return best <= 0.0;
      });
    }
    return best;
  }

  // Lowest index of a cap containing p (within slack), or -1.
  long first_containing(const UnitVector& p, double slack) const {
    long found = -1;
    for (const auto& [b, band] : bands_) {
      double q = chord_of_angle(band.r_max + slack);
      band.scan(*this, p.v, q, [&](std::uint32_t idx, const Cap& c) {
        if (chord_sq(p.v, c.center.v) <= sq(chord_of_angle(c.radius + slack)))
          if (found < 0 || idx < found) found = idx;
        return false;
      });
    }
    return found;
  }

 private:
  static double sq(double x) { return x * x; }

  // Geometric radius bands: band i holds radii in [k*2^i, k*2^(i+1)).
  static int band_of(double r) {
    int b = 0;
    double lo = kBandBase;
    while (r >= lo * 2.0 && b < 12) {
      lo *= 2.0;
      ++b;
    }
    return b;
  }
  static double cell_for_band(int b) {
    double upper = kBandBase * std::pow(2.0, b + 1);
    return 2.5 * upper;
  }

  struct Band {
    explicit Band(double cell_) : cell(cell_) {}
    double cell;
    double r_max = 0.0;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells;

    static std::uint64_t key(long ix, long iy, long iz) {
      auto u = [](long v) { return static_cast<std::uint64_t>(v + (1l << 20)) & 0x1fffff; };
      return (u(ix) << 42) | (u(iy) << 21) | u(iz);
    }

    void insert_position(CapSet& owner, std::size_t idx) {
      const Vec3& v = owner.caps_[idx].center.v;
      long ix = static_cast<long>(std::floor(v.x / cell));
      long iy = static_cast<long>(std::floor(v.y / cell));
      long iz = static_cast<long>(std::floor(v.z / cell));
      cells[key(ix, iy, iz)].push_back(static_cast<std::uint32_t>(idx));
    }

    // Visit caps whose centers lie within chord q of v; stop early if f returns
    // true. When the query cube would touch more cells than the band occupies,
    // walk the occupied buckets instead (callers' predicates are order-free).
    template <class F>
    void scan(const CapSet& owner, const Vec3& v, double q, F&& f) const {
      long r = static_cast<long>(std::ceil(q / cell));
      double cube = std::pow(2.0 * static_cast<double>(r) + 1.0, 3);
      if (cube > static_cast<double>(cells.size())) {
        for (const auto& [k, bucket] : cells)
          for (std::uint32_t idx : bucket)
            if (f(idx, owner.caps_[idx])) return;
        return;
      }
      long ix = static_cast<long>(std::floor(v.x / cell));
      long iy = static_cast<long>(std::floor(v.y / cell));
      long iz = static_cast<long>(std::floor(v.z / cell));
      for (long dx = -r; dx <= r; ++dx)
        for (long dy = -r; dy <= r; ++dy)
          for (long dz = -r; dz <= r; ++dz) {
            auto it = cells.find(key(ix + dx, iy + dy, iz + dz));
            if (it == cells.end()) continue;
            for (std::uint32_t idx : it->second)
              if (f(idx, owner.caps_[idx])) return;
          }
    }
  };

  static constexpr double kBandBase = 5e-4;

  std::vector<Cap> caps_;
  std::unordered_map<int, Band> bands_;
};

// Coarse latitude-longitude bitmap recording cells that are certainly inside
// some registered cap. A fast pre-filter for "is this point already covered";
// misses are resolved by the exact CapSet query.
class OccupancyGrid {
 public:
  // Steps are chosen so cells tile [0, pi] x [0, 2pi) exactly; otherwise a
  // wrapped longitude index would shift the cell span by a fraction of a
  // cell and mark() could certify points that are actually outside the cap.
  explicit OccupancyGrid(double cell_rad = 1.5e-3)
      : n_theta_(static_cast<int>(std::ceil(kPi / cell_rad))),
        n_phi_(static_cast<int>(std::ceil(kTwoPi / cell_rad))),
        cell_t_(kPi / n_theta_),
        cell_p_(kTwoPi / n_phi_),
        min_mark_(3.0 * cell_rad),
        marked_(static_cast<std::size_t>(n_theta_) * n_phi_, 0) {}

  void mark(const Cap& c) {
    if (c.radius < min_mark_) return;  // too small to contain a whole cell
    double tc = std::acos(std::clamp(c.center.z(), -1.0, 1.0));
    double pc = std::atan2(c.center.y(), c.center.x());
    int t0 = std::max(0, static_cast<int>((tc - c.radius) / cell_t_) - 1);
    int t1 = std::min(n_theta_ - 1, static_cast<int>((tc + c.radius) / cell_t_) + 1);
    for (int it = t0; it <= t1; ++it) {
      double th_lo = it * cell_t_, th_hi = (it + 1) * cell_t_;
      double sin_max = std::max(std::sin(th_lo), std::sin(th_hi));
      if (th_lo < kPi / 2 && th_hi > kPi / 2) sin_max = 1.0;
      double half_diag =
          0.5 * std::sqrt(sq(cell_t_) + sq(sin_max * cell_p_)) * 1.01 + 1e-9;
      double dphi_reach;
      double sin_mid = std::sin(0.5 * (th_lo + th_hi));
      if (sin_mid < 1e-6) {
        dphi_reach = kPi;
      } else {
        dphi_reach = std::min(kPi, c.radius / sin_mid + cell_p_);
      }
      int p0 = static_cast<int>(std::floor((pc - dphi_reach) / cell_p_)) - 1;
      int p1 = static_cast<int>(std::ceil((pc + dphi_reach) / cell_p_)) + 1;
      for (int ip = p0; ip <= p1; ++ip) {
        double th_c = 0.5 * (th_lo + th_hi);
        double ph_c = (ip + 0.5) * cell_p_;
        UnitVector cc(Vec3{std::sin(th_c) * std::cos(ph_c), std::sin(th_c) * std::sin(ph_c),
                           std::cos(th_c)});
        if (angular_distance(cc, c.center) + half_diag <= c.radius)
          marked_[index(it, wrap(ip))] = 1;
      }
    }
  }

  bool certainly_covered(const UnitVector& p) const {
    double th = std::acos(std::clamp(p.z(), -1.0, 1.0));
    double ph = std::atan2(p.y(), p.x());
    if (ph < 0) ph += kTwoPi;
    int it = std::min(n_theta_ - 1, static_cast<int>(th / cell_t_));
    int ip = std::min(n_phi_ - 1, static_cast<int>(ph / cell_p_));
    return marked_[index(it, ip)] != 0;
  }

 private:
  static double sq(double x) { return x * x; }
  int wrap(int ip) const {
    int m = ip % n_phi_;
    return m < 0 ? m + n_phi_ : m;
  }
  std::size_t index(int it, int ip) const {
    return static_cast<std::size_t>(it) * n_phi_ + ip;
  }

  int n_theta_;
  int n_phi_;
  double cell_t_;
  double cell_p_;
  double min_mark_;
  std::vector<std::uint8_t> marked_;
};

}  // namespace rotplace
