#include "rotplace/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace rotplace {

namespace {

template <class CellFn>
void for_each_square(double eps, double bound_radius, CellFn&& fn) {
  long lo = static_cast<long>(std::floor(-bound_radius / eps)) - 1;
  long hi = static_cast<long>(std::ceil(bound_radius / eps));
  for (long ix = lo; ix <= hi; ++ix)
    for (long iy = lo; iy <= hi; ++iy) fn(ix, iy);
}

}  // namespace

std::vector<LatticeSquare> count_inner_squares(const PlanarPred& pred, double eps,
                                               double bound_radius) {
  if (!(eps > 0.0)) throw std::invalid_argument("lattice side must be positive");
  double delta = eps / 10.0;
  std::vector<LatticeSquare> out;
  for_each_square(eps, bound_radius, [&](long ix, long iy) {
    double x0 = ix * eps, y0 = iy * eps;
    double x1 = x0 + eps, y1 = y0 + eps;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        double px = x0 + eps * i / 4.0;
        double py = y0 + eps * j / 4.0;
        // The probe and its eroded neighbours (clamped into the square) must
        // all be members.
        double xs[3] = {px, std::max(x0, px - delta), std::min(x1, px + delta)};
        double ys[3] = {py, std::max(y0, py - delta), std::min(y1, py + delta)};
        for (double qx : xs)
          for (double qy : ys)
            if (!pred(qx, qy)) return;
      }
    out.push_back(LatticeSquare{ix, iy});
  });
  return out;
}

std::vector<LatticeSquare> count_covering_squares(const PlanarPred& pred, double eps,
                                                  double bound_radius) {
  if (!(eps > 0.0)) throw std::invalid_argument("lattice side must be positive");
  std::vector<LatticeSquare> out;
  for_each_square(eps, bound_radius, [&](long ix, long iy) {
    double x0 = ix * eps, y0 = iy * eps;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (pred(x0 + eps * i / 4.0, y0 + eps * j / 4.0)) {
          out.push_back(LatticeSquare{ix, iy});
          return;
        }
  });
  return out;
}

std::vector<std::pair<FramedSquare, FramedSquare>> match_squares(
    const std::vector<FramedSquare>& sources, const std::vector<FramedSquare>& targets) {
  if (sources.size() > targets.size())
    throw CapacityError("not enough target squares to receive all source squares");
  std::vector<std::pair<FramedSquare, FramedSquare>> pairs;
  pairs.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) pairs.emplace_back(sources[i], targets[i]);
  return pairs;
}

Cap lift_square_to_cap(const LatticeSquare& sq, double eps, const ProjectionFrame& frame,
                       double euclidean_radius) {
  if (euclidean_radius >= 2.0)
    throw std::domain_error("ball radius must be below the sphere diameter");
  if (!(euclidean_radius > 0.0)) throw std::domain_error("ball radius must be positive");
  Planar c{(sq.ix + 0.5) * eps, (sq.iy + 0.5) * eps};
  if (c.x * c.x + c.y * c.y > 1.0)
    throw std::domain_error("square center lies outside the unit disk");
  Cap cap;
  cap.center = lift_point(frame, c);
  cap.radius = 2.0 * std::asin(euclidean_radius / 2.0);
  return cap;
}

Cap lift_square_to_cap(const LatticeSquare& sq, double eps, const ProjectionFrame& frame,
                       RadiusRule rule) {
  double r = rule == RadiusRule::half_eps ? eps / 2.0 : eps / std::sqrt(2.0);
  return lift_square_to_cap(sq, eps, frame, r);
}

Rotation cap_rotation(const Cap& source, const Cap& target) {
  if (std::fabs(source.radius - target.radius) > 1e-9)
    throw std::invalid_argument("caps must have equal angular radii");
  return rotation_aligning(source.center, target.center);
}

}  // namespace rotplace
