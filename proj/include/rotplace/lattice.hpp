#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rotplace/geom.hpp"
#include "rotplace/index.hpp"

namespace rotplace {

// Plane through the sphere center orthogonal to the cap center, with an
// orthonormal basis; projection coordinates are (p.e1, p.e2) in unit-radius
// units, so |project(p)| = sin(polar angle of p).
struct ProjectionFrame {
  UnitVector center;
  UnitVector e1;
  UnitVector e2;
};

inline ProjectionFrame make_frame(const UnitVector& cap_center) {
  ProjectionFrame f;
  f.center = cap_center;
  f.e1 = any_orthogonal(cap_center);
  f.e2 = UnitVector(cross(cap_center.v, f.e1.v));
  return f;
}

struct Planar {
  double x = 0.0, y = 0.0;
};

inline Planar project_point(const ProjectionFrame& f, const UnitVector& p) {
  return {dot(p.v, f.e1.v), dot(p.v, f.e2.v)};
}

// Preimage on the cap-side hemisphere; rejects |q| > 1.
inline UnitVector lift_point(const ProjectionFrame& f, const Planar& q) {
  double rr = q.x * q.x + q.y * q.y;
  if (rr > 1.0) throw std::domain_error("cannot lift a point outside the unit disk");
  double z = std::sqrt(1.0 - rr);
  return UnitVector(f.e1.v * q.x + f.e2.v * q.y + f.center.v * z);
}

using PlanarPred = std::function<bool(double, double)>;

// Lattice square [ix*eps, (ix+1)*eps] x [iy*eps, (iy+1)*eps].
struct LatticeSquare {
  long ix = 0;
  long iy = 0;
};

// Squares fully inside the region according to a 5x5 probe grid per square with
// an erosion margin delta = eps/10: every probe must remain a member when
// nudged by +-delta along each axis (nudges clamped to the square). A
// conservative undercount of the true inner squares.
std::vector<LatticeSquare> count_inner_squares(const PlanarPred& pred, double eps,
                                               double bound_radius);

// Squares whose 5x5 probe grid contains at least one member point; a superset
// of the inner squares.
std::vector<LatticeSquare> count_covering_squares(const PlanarPred& pred, double eps,
                                                  double bound_radius);

struct FramedSquare {
  int frame = 0;  // index into the cover / frame list
  LatticeSquare sq;
};

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Greedy injective assignment in index order; throws CapacityError when there
// are more sources than targets.
std::vector<std::pair<FramedSquare, FramedSquare>> match_squares(
    const std::vector<FramedSquare>& sources, const std::vector<FramedSquare>& targets);

enum class RadiusRule { half_eps, eps_over_sqrt2 };

// Cap cut out by the Euclidean ball of radius r centered at the lift of the
// square center; angular radius 2*asin(r/2). Rejects r >= 2 and square centers
// outside the unit disk.
Cap lift_square_to_cap(const LatticeSquare& sq, double eps, const ProjectionFrame& frame,
                       RadiusRule rule);
Cap lift_square_to_cap(const LatticeSquare& sq, double eps, const ProjectionFrame& frame,
                       double euclidean_radius);

// Rotation carrying one cap onto another of equal radius (within 1e-9).
Rotation cap_rotation(const Cap& source, const Cap& target);

}  // namespace rotplace
