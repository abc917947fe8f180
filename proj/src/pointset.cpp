#include "rotplace/pointset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rotplace/region.hpp"

namespace rotplace {

PointSet preset_pointset(const std::string& name, int n) {
  PointSet ps;
  if (name == "tetrahedron") {
    double s = 1.0 / std::sqrt(3.0);
    ps.points = {UnitVector(Vec3{s, s, s}), UnitVector(Vec3{s, -s, -s}),
                 UnitVector(Vec3{-s, s, -s}), UnitVector(Vec3{-s, -s, s})};
    return ps;
  }
  if (name == "antipodal-pair") {
    ps.points = {UnitVector(0.0, 0.0, 1.0), UnitVector(0.0, 0.0, -1.0)};
    return ps;
  }
  if (name == "n-gon-on-great-circle") {
    if (n < 1) throw std::invalid_argument("n-gon preset requires n >= 1");
    for (int k = 0; k < n; ++k) {
      double t = kTwoPi * k / n;
      ps.points.emplace_back(Vec3{std::cos(t), std::sin(t), 0.0});
    }
    return ps;
  }
  throw std::invalid_argument("unknown point-set preset: " + name);
}

namespace {

using nlohmann::json;

UnitVector parse_point(const json& j) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number())
    throw RegionParseError("point must be an array of 3 numbers");
  Vec3 v{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  if (norm(v) < 1e-9) throw RegionParseError("point has near-zero norm; cannot normalize");
  return UnitVector(v);
}

}  // namespace

PointSet pointset_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw RegionParseError(std::string("invalid JSON: ") + e.what());
  }
  const json* arr = nullptr;
  if (j.is_array()) {
    arr = &j;
  } else if (j.is_object() && j.contains("points") && j.at("points").is_array()) {
    arr = &j.at("points");
  } else {
    throw RegionParseError("point set must be an array of points or {\"points\": [...]}");
  }
  PointSet ps;
  for (const auto& e : *arr) ps.points.push_back(parse_point(e));
  if (ps.points.empty()) throw RegionParseError("point set must contain at least one point");
  return ps;
}

std::string pointset_to_json_text(const PointSet& ps) {
  json arr = json::array();
  for (const auto& p : ps.points) arr.push_back(json::array({p.x(), p.y(), p.z()}));
  json j;
  j["points"] = std::move(arr);
  return j.dump(2);
}

PointSet load_pointset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RegionParseError("cannot open point-set file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return pointset_from_json_text(ss.str());
}

}  // namespace rotplace
