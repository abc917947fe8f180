#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rotplace/region.hpp"

namespace rotplace {

namespace {

using nlohmann::json;

UnitVector parse_unit(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number())
    throw RegionParseError(std::string(field) + " must be an array of 3 numbers");
  Vec3 v{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  if (norm(v) < 1e-9)
    throw RegionParseError(std::string(field) + " has near-zero norm; cannot normalize");
  return UnitVector(v);
}

Boundary parse_boundary(const json& j) {
  if (!j.contains("boundary")) return Boundary::closed;
  std::string b = j.at("boundary").get<std::string>();
  if (b == "open") return Boundary::open;
  if (b == "closed") return Boundary::closed;
  throw RegionParseError("boundary must be \"open\" or \"closed\"");
}

double parse_number(const json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_number())
    throw RegionParseError(std::string("missing or non-numeric field: ") + field);
  return j.at(field).get<double>();
}

Region parse_region(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw RegionParseError("region node must be an object with a string \"type\"");
  std::string type = j.at("type").get<std::string>();
  try {
    if (type == "empty") return Region::empty();
    if (type == "full") return Region::full();
    if (type == "cap")
      return Region::cap(parse_unit(j.at("center"), "center"), parse_number(j, "radius"),
                         parse_boundary(j));
    if (type == "lune")
      return Region::lune(parse_unit(j.at("axis"), "axis"), parse_number(j, "start"),
                          parse_number(j, "width"), parse_boundary(j));
    if (type == "hemisphere")
      return Region::hemisphere(parse_unit(j.at("normal"), "normal"), parse_boundary(j));
    if (type == "union" || type == "intersection") {
      if (!j.contains("children") || !j.at("children").is_array())
        throw RegionParseError(type + " requires a \"children\" array");
      std::vector<Region> parts;
      for (const auto& c : j.at("children")) parts.push_back(parse_region(c));
      return type == "union" ? Region::union_of(std::move(parts))
                             : Region::intersection_of(std::move(parts));
    }
    if (type == "complement") {
      if (!j.contains("children") || !j.at("children").is_array() || j.at("children").size() != 1)
        throw RegionParseError("complement requires exactly one child");
      return Region::complement(parse_region(j.at("children")[0]));
    }
    if (type == "difference") {
      if (!j.contains("children") || !j.at("children").is_array() || j.at("children").size() != 2)
        throw RegionParseError("difference requires exactly two children");
      return Region::difference(parse_region(j.at("children")[0]),
                                parse_region(j.at("children")[1]));
    }
  } catch (const json::exception& e) {
    throw RegionParseError(std::string("malformed region node: ") + e.what());
  } catch (const std::domain_error& e) {
    throw RegionParseError(e.what());
  }
  throw RegionParseError("unknown region type: " + type);
}

json unit_to_json(const UnitVector& u) { return json::array({u.x(), u.y(), u.z()}); }

json node_to_json(const RegionNode& n) {
  json j;
  switch (n.kind) {
    case NodeKind::empty:
      j["type"] = "empty";
      return j;
    case NodeKind::full:
      j["type"] = "full";
      return j;
    case NodeKind::cap:
      j["type"] = "cap";
      j["center"] = unit_to_json(n.axis);
      j["radius"] = n.radius;
      break;
    case NodeKind::lune:
      j["type"] = "lune";
      j["axis"] = unit_to_json(n.axis);
      j["start"] = n.start;
      j["width"] = n.width;
      break;
    case NodeKind::hemisphere:
      j["type"] = "hemisphere";
      j["normal"] = unit_to_json(n.axis);
      break;
    case NodeKind::union_:
    case NodeKind::intersection:
    case NodeKind::complement:
    case NodeKind::difference: {
      j["type"] = n.kind == NodeKind::union_          ? "union"
                  : n.kind == NodeKind::intersection  ? "intersection"
                  : n.kind == NodeKind::complement    ? "complement"
                                                      : "difference";
      json kids = json::array();
      for (const auto& c : n.children) kids.push_back(node_to_json(*c));
      j["children"] = std::move(kids);
      return j;
    }
  }
  j["boundary"] = n.boundary == Boundary::open ? "open" : "closed";
  return j;
}

}  // namespace

Region region_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw RegionParseError(std::string("invalid JSON: ") + e.what());
  }
  return parse_region(j);
}

std::string region_to_json_text(const Region& r) { return node_to_json(r.node()).dump(2); }

Region load_region_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RegionParseError("cannot open region file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return region_from_json_text(ss.str());
}

void save_region_file(const Region& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw RegionParseError("cannot open region file for writing: " + path);
  out << region_to_json_text(r) << "\n";
}

}  // namespace rotplace
