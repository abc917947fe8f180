#include "rotplace/region.hpp"

#include <algorithm>
#include <cmath>

namespace rotplace {

namespace {

constexpr double kCertTol = 1e-12;

double wrap_longitude(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  return y;
}

// Longitude of p in the lune frame, in [0, 2*pi).
double lune_longitude(const RegionNode& n, const UnitVector& p) {
  double u = dot(p, n.e1);
  double v = dot(p, n.e2);
  double lam = std::atan2(v, u);
  if (lam < 0.0) lam += kTwoPi;
  return lam;
}

}  // namespace

Region Region::empty() {
  auto n = std::make_shared<RegionNode>();
  n->kind = NodeKind::empty;
  return Region(std::move(n));
}

Region Region::full() {
  auto n = std::make_shared<RegionNode>();
  n->kind = NodeKind::full;
  return Region(std::move(n));
}

Region Region::cap(const UnitVector& center, double radius, Boundary b) {
  cap_area(radius);  // validates the radius range
  auto n = std::make_shared<RegionNode>();
  n->kind = NodeKind::cap;
  n->axis = center;
  n->radius = radius;
  n->boundary = b;
  return Region(std::move(n));
}

Region Region::lune(const UnitVector& axis, double start, double width, Boundary b) {
  lune_area(width);  // validates the width range
  auto n = std::make_shared<RegionNode>();
  n->kind = NodeKind::lune;
  n->axis = axis;
  n->start = wrap_longitude(start);
  n->width = width;
  n->boundary = b;
  n->e1 = any_orthogonal(axis);
  n->e2 = UnitVector(cross(axis.v, n->e1.v));
  return Region(std::move(n));
}

Region Region::hemisphere(const UnitVector& normal, Boundary b) {
  auto n = std::make_shared<RegionNode>();
  n->kind = NodeKind::hemisphere;
  n->axis = normal;
  n->boundary = b;
  return Region(std::move(n));
}

Region Region::union_of(std::vector<Region> parts) {
  auto n = std::make_shared<RegionNode>();
  n->kind = NodeKind::union_;
  for (auto& p : parts) n->children.push_back(p.node_ptr());
  return Region(std::move(n));
}

Region Region::intersection_of(std::vector<Region> parts) {
  auto n = std::make_shared<RegionNode>();
  n->kind = NodeKind::intersection;
  for (auto& p : parts) n->children.push_back(p.node_ptr());
  return Region(std::move(n));
}

Region Region::complement(const Region& r) {
  auto n = std::make_shared<RegionNode>();
  n->kind = NodeKind::complement;
  n->children.push_back(r.node_ptr());
  return Region(std::move(n));
}

Region Region::difference(const Region& a, const Region& b) {
  auto n = std::make_shared<RegionNode>();
  n->kind = NodeKind::difference;
  n->children.push_back(a.node_ptr());
  n->children.push_back(b.node_ptr());
  return Region(std::move(n));
}

namespace {

bool node_contains(const RegionNode& n, const UnitVector& p) {
  switch (n.kind) {
    case NodeKind::empty:
      return false;
    case NodeKind::full:
      return true;
    case NodeKind::cap: {
      double d = angular_distance(n.axis, p);
      return n.boundary == Boundary::closed ? d <= n.radius : d < n.radius;
    }
    case NodeKind::hemisphere: {
      double c = dot(p, n.axis);
      return n.boundary == Boundary::closed ? c >= 0.0 : c > 0.0;
    }
    case NodeKind::lune: {
      double rel = wrap_longitude(lune_longitude(n, p) - n.start);
      if (n.boundary == Boundary::closed) {
        if (n.width >= kTwoPi) return true;
        return rel < n.width;
      }
      return rel > 0.0 && rel < n.width;
    }
    case NodeKind::union_:
      for (const auto& c : n.children)
        if (node_contains(*c, p)) return true;
      return false;
    case NodeKind::intersection:
      for (const auto& c : n.children)
        if (!node_contains(*c, p)) return false;
      return true;
    case NodeKind::complement:
      return !node_contains(*n.children[0], p);
    case NodeKind::difference:
      return node_contains(*n.children[0], p) && !node_contains(*n.children[1], p);
  }
  return false;
}

double node_clearance(const RegionNode& n, const UnitVector& p) {
  switch (n.kind) {
    case NodeKind::empty:
      return -4.0;
    case NodeKind::full:
      return 4.0;
    case NodeKind::cap:
      return n.radius - angular_distance(n.axis, p);
    case NodeKind::hemisphere:
      return std::asin(std::clamp(dot(p, n.axis), -1.0, 1.0));
    case NodeKind::lune: {
      if (n.width >= kTwoPi && n.boundary == Boundary::closed) return 4.0;
      // Distance to each bounding half-meridian, not to its full great
      // circle: past a quarter turn in longitude the nearest edge point is a
      // pole, and the plane formula would report spurious walls there.
      double rel = wrap_longitude(lune_longitude(n, p) - n.start);
      double polar = angular_distance(n.axis, p);
      auto edge_dist = [polar](double delta) {
        delta = std::min(delta, kTwoPi - delta);
        if (delta <= kPi / 2.0)
          return std::asin(std::min(1.0, std::sin(delta) * std::sin(polar)));
        return std::min(polar, kPi - polar);
      };
      double edge = std::min(edge_dist(rel), edge_dist(std::abs(rel - n.width)));
      bool in = node_contains(n, p);
      return in ? edge : -edge;
    }
    case NodeKind::union_: {
      double best = -4.0;
      for (const auto& c : n.children) best = std::max(best, node_clearance(*c, p));
      return best;
    }
    case NodeKind::intersection: {
      double worst = 4.0;
      for (const auto& c : n.children) worst = std::min(worst, node_clearance(*c, p));
      return worst;
    }
    case NodeKind::complement:
      return -node_clearance(*n.children[0], p);
    case NodeKind::difference:
      return std::min(node_clearance(*n.children[0], p), -node_clearance(*n.children[1], p));
  }
  return -4.0;
}

struct LeafDisk {
  // A leaf viewed as a cap when possible (hemisphere is a half-pi cap).
  bool is_cap = false;
  UnitVector center;
  double radius = 0.0;
};

std::optional<LeafDisk> as_cap(const RegionNode& n) {
  if (n.kind == NodeKind::cap) return LeafDisk{true, n.axis, n.radius};
  if (n.kind == NodeKind::hemisphere) return LeafDisk{true, n.axis, kPi / 2.0};
  return std::nullopt;
}

// Certifies that two leaves meet in at most a measure-zero set.
bool certified_disjoint(const RegionNode& a, const RegionNode& b) {
  if (a.kind == NodeKind::empty || b.kind == NodeKind::empty) return true;
  auto ca = as_cap(a);
  auto cb = as_cap(b);
  if (ca && cb)
    return angular_distance(ca->center, cb->center) >= ca->radius + cb->radius - kCertTol;
  if (a.kind == NodeKind::lune && b.kind == NodeKind::lune) {
    if (dot(a.axis, b.axis) < 1.0 - kCertTol) return false;
    // Same frame derivation, so longitudes are comparable directly.
    bool ahead = wrap_longitude(b.start - a.start) >= a.width - kCertTol;
    bool behind = wrap_longitude(a.start - b.start) >= b.width - kCertTol;
    return ahead && behind;
  }
  return false;
}

// Certifies inner is a subset of outer up to measure zero.
bool certified_subset(const RegionNode& inner, const RegionNode& outer) {
  if (inner.kind == NodeKind::empty || outer.kind == NodeKind::full) return true;
  auto ci = as_cap(inner);
  auto co = as_cap(outer);
  if (ci && co)
    return angular_distance(ci->center, co->center) + ci->radius <= co->radius + kCertTol;
  if (inner.kind == NodeKind::lune && outer.kind == NodeKind::lune) {
    if (dot(inner.axis, outer.axis) < 1.0 - kCertTol) return false;
    double off = wrap_longitude(inner.start - outer.start);
    return off + inner.width <= outer.width + kCertTol;
  }
  return false;
}

std::optional<double> node_exact_area(const RegionNode& n) {
  switch (n.kind) {
    case NodeKind::empty:
      return 0.0;
    case NodeKind::full:
      return 1.0;
    case NodeKind::cap:
      return cap_area(n.radius);
    case NodeKind::hemisphere:
      return 0.5;
    case NodeKind::lune:
      return lune_area(n.width);
    case NodeKind::complement: {
      auto a = node_exact_area(*n.children[0]);
      if (!a) return std::nullopt;
      return 1.0 - *a;
    }
    case NodeKind::difference: {
      auto a = node_exact_area(*n.children[0]);
      auto b = node_exact_area(*n.children[1]);
      if (!a || !b) return std::nullopt;
      if (!certified_subset(*n.children[1], *n.children[0])) return std::nullopt;
      return std::max(0.0, *a - *b);
    }
    case NodeKind::union_: {
      double total = 0.0;
      for (const auto& c : n.children) {
        auto a = node_exact_area(*c);
        if (!a) return std::nullopt;
        total += *a;
      }
      for (size_t i = 0; i < n.children.size(); ++i)
        for (size_t j = i + 1; j < n.children.size(); ++j)
          if (!certified_disjoint(*n.children[i], *n.children[j])) return std::nullopt;
      return std::min(1.0, total);
    }
    case NodeKind::intersection: {
      for (const auto& c : n.children)
        if (c->kind == NodeKind::empty) return 0.0;
      double only = -1.0;
      for (const auto& c : n.children) {
        if (c->kind == NodeKind::full) continue;
        auto a = node_exact_area(*c);
        if (!a || only >= 0.0) return std::nullopt;
        only = *a;
      }
      return only < 0.0 ? 1.0 : only;
    }
  }
  return std::nullopt;
}

}  // namespace

bool Region::contains(const UnitVector& p) const { return node_contains(*node_, p); }

double Region::signed_clearance(const UnitVector& p) const { return node_clearance(*node_, p); }

std::optional<double> Region::exact_area() const { return node_exact_area(*node_); }

std::vector<Region> make_lune_partition(int n, const UnitVector& axis) {
  if (n <= 0) throw std::invalid_argument("partition size must be positive");
  std::vector<Region> out;
  out.reserve(static_cast<size_t>(n));
  double w = kTwoPi / n;
  for (int k = 0; k < n; ++k) out.push_back(Region::lune(axis, k * w, w, Boundary::closed));
  return out;
}

}  // namespace rotplace
