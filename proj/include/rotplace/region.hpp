#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotplace/geom.hpp"

namespace rotplace {

// Areas everywhere are fractions of the total sphere area (sphere normalized to area 1).
enum class Boundary { open, closed };

inline double cap_area(double radius) {
  if (!(radius > 0.0) || radius > kPi) throw std::domain_error("cap radius must be in (0, pi]");
  return (1.0 - std::cos(radius)) / 2.0;
}

inline double lune_area(double width) {
  if (!(width > 0.0) || width > kTwoPi) throw std::domain_error("lune width must be in (0, 2*pi]");
  return width / kTwoPi;
}

enum class NodeKind { empty, full, cap, lune, hemisphere, union_, intersection, complement, difference };

struct RegionNode;
using RegionNodePtr = std::shared_ptr<const RegionNode>;

struct RegionNode {
  NodeKind kind = NodeKind::empty;
  UnitVector axis;               // cap center / lune axis / hemisphere normal
  double radius = 0.0;           // cap angular radius
  double start = 0.0;            // lune start longitude in [0, 2*pi)
  double width = 0.0;            // lune width in (0, 2*pi]
  Boundary boundary = Boundary::closed;
  UnitVector e1, e2;             // lune longitude frame (e2 = axis x e1)
  std::vector<RegionNodePtr> children;
};

class Region {
 public:
  Region() : node_(std::make_shared<RegionNode>()) {}

  static Region empty();
  static Region full();
  static Region cap(const UnitVector& center, double radius, Boundary b);
  // Longitudes are measured in a frame derived deterministically from the axis;
  // `closed` means the half-open interval [start, start+width) so equal-width
  // partitions tile exactly, `open` excludes both edges.
  static Region lune(const UnitVector& axis, double start, double width, Boundary b);
  static Region hemisphere(const UnitVector& normal, Boundary b);
  static Region union_of(std::vector<Region> parts);
  static Region intersection_of(std::vector<Region> parts);
  static Region complement(const Region& r);
  static Region difference(const Region& a, const Region& b);

  bool contains(const UnitVector& p) const;

  // Closed-form area when the tree supports it (leaves, complements of supported
  // trees, certified-disjoint unions, certified nested differences).
  std::optional<double> exact_area() const;

  // Signed angular clearance lower bound: positive inside, at most the true
  // distance to the region boundary in magnitude.
  double signed_clearance(const UnitVector& p) const;

  const RegionNode& node() const { return *node_; }
  RegionNodePtr node_ptr() const { return node_; }

 private:
  explicit Region(RegionNodePtr n) : node_(std::move(n)) {}
  RegionNodePtr node_;
};

// n equal-width half-open lunes around `axis`, starting at longitudes 2*pi*k/n.
std::vector<Region> make_lune_partition(int n, const UnitVector& axis);

struct RegionParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Region region_from_json_text(const std::string& text);
std::string region_to_json_text(const Region& r);
Region load_region_file(const std::string& path);
void save_region_file(const Region& r, const std::string& path);

}  // namespace rotplace
