#pragma once

#include <string>
#include <vector>

#include "rotplace/geom.hpp"

namespace rotplace {

struct PointSet {
  std::vector<UnitVector> points;

  int n() const { return static_cast<int>(points.size()); }
};

// Named presets: "tetrahedron" (pairwise dot products exactly -1/3),
// "antipodal-pair", "n-gon-on-great-circle" (n equally spaced equator points,
// requires n >= 1). Unknown names throw std::invalid_argument.
PointSet preset_pointset(const std::string& name, int n = 0);

// JSON: either [[x,y,z],...] or {"points":[[x,y,z],...]}; entries normalized on
// load, near-zero entries rejected.
PointSet pointset_from_json_text(const std::string& text);
std::string pointset_to_json_text(const PointSet& ps);
PointSet load_pointset_file(const std::string& path);

}  // namespace rotplace
