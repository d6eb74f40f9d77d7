#include "sidewidth/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "sidewidth/error.hpp"

namespace sidewidth {
namespace {

using nlohmann::json;

double number(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw FormatError(where, std::string("missing or non-numeric '") + key + "'");
  return it->get<double>();
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw FormatError(where, std::string("'") + key + "' must be a number");
  return it->get<double>();
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) throw FormatError(where, std::string("missing or non-string '") + key + "'");
  return it->get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() ? base / path : path;
}

ImageManifestEntry parse_entry(const json& obj, const std::filesystem::path& base, const std::string& where) {
  if (!obj.is_object()) throw FormatError(where, "entry is not an object");
  ImageManifestEntry e;
  e.image_id = string_field(obj, "image_id", where);
  e.point_map_path = resolve(base, string_field(obj, "point_map_path", where));
  e.mask_path = resolve(base, string_field(obj, "mask_path", where));
  e.camera_height_m = optional_number(obj, "camera_height_m", where);
  if (e.camera_height_m && !(*e.camera_height_m > 0.0)) throw FormatError(where, "camera_height_m must be > 0");
  e.fov_deg = optional_number(obj, "fov_deg", where);
  if (e.fov_deg && !(*e.fov_deg > 0.0 && *e.fov_deg < 180.0)) throw FormatError(where, "fov_deg must be in (0, 180)");
  if (auto it = obj.find("intrinsics"); it != obj.end() && !it->is_null()) {
    Intrinsics k{number(*it, "fx", where), number(*it, "fy", where), number(*it, "cx", where),
                 number(*it, "cy", where)};
    if (!(k.fx > 0.0 && k.fy > 0.0)) throw FormatError(where, "intrinsics fx, fy must be > 0");
    e.intrinsics = k;
  }
  if (auto it = obj.find("camera_centre"); it != obj.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 3) throw FormatError(where, "camera_centre must be [x, y, z]");
    e.camera_centre = Eigen::Vector3d((*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>());
  }
  if (auto it = obj.find("geo"); it != obj.end() && !it->is_null()) {
    e.geo = GeoTag{number(*it, "lat", where), number(*it, "lon", where),
                   optional_number(*it, "heading_deg", where).value_or(0.0)};
  }
  if (auto it = obj.find("segment_id"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw FormatError(where, "segment_id must be a string");
    e.segment_id = it->get<std::string>();
  }
  e.reference_width_m = optional_number(obj, "reference_width_m", where);
  return e;
}

// Entry paths are as the caller sees them (absolute or relative to the working directory).
std::string relative_if_below(const std::filesystem::path& p, const std::filesystem::path& base) {
  const auto abs = std::filesystem::absolute(p).lexically_normal();
  const auto rel = abs.lexically_relative(std::filesystem::absolute(base).lexically_normal());
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return abs.generic_string();
}

}  // namespace

std::vector<ImageManifestEntry> load_manifest(const std::filesystem::path& path) {
  const std::string p = path.string();
  std::ifstream in(path);
  if (!in) throw FormatError(p, "cannot open manifest");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(p, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_array()) throw FormatError(p, "manifest must be a JSON array");
  const auto base = path.parent_path();
  std::vector<ImageManifestEntry> entries;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    try {
      entries.push_back(parse_entry(doc[i], base, p + "[" + std::to_string(i) + "]"));
    } catch (const json::exception& e) {
      throw FormatError(p + "[" + std::to_string(i) + "]", e.what());
    }
    if (!ids.insert(entries.back().image_id).second)
      throw FormatError(p, "duplicate image_id '" + entries.back().image_id + "'");
  }
  return entries;
}

void save_manifest(const std::filesystem::path& path, const std::vector<ImageManifestEntry>& entries) {
  const auto base = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  json doc = json::array();
  for (const auto& e : entries) {
    json obj;
    obj["image_id"] = e.image_id;
    obj["point_map_path"] = relative_if_below(e.point_map_path, base);
    obj["mask_path"] = relative_if_below(e.mask_path, base);
    if (e.camera_height_m) obj["camera_height_m"] = *e.camera_height_m;
    if (e.fov_deg) obj["fov_deg"] = *e.fov_deg;
    if (e.intrinsics) {
      obj["intrinsics"] = {{"fx", e.intrinsics->fx}, {"fy", e.intrinsics->fy}, {"cx", e.intrinsics->cx},
                           {"cy", e.intrinsics->cy}};
    }
    if (e.camera_centre) obj["camera_centre"] = {e.camera_centre->x(), e.camera_centre->y(), e.camera_centre->z()};
    if (e.geo) obj["geo"] = {{"lat", e.geo->lat}, {"lon", e.geo->lon}, {"heading_deg", e.geo->heading_deg}};
    if (e.segment_id) obj["segment_id"] = *e.segment_id;
    if (e.reference_width_m) obj["reference_width_m"] = *e.reference_width_m;
    doc.push_back(std::move(obj));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError(path.string(), "cannot open manifest for writing");
  out << doc.dump(2) << '\n';
}

ImageData load_image(const ImageManifestEntry& entry, const ClassMap& class_map) {
  Geometry geometry = load_geometry(entry.point_map_path);
  SemanticMask mask = load_mask(entry.mask_path, class_map);
  std::visit([&](const auto& g) { require_same_dimensions(mask, g.width(), g.height(), entry.image_id); }, geometry);
  return {std::move(geometry), std::move(mask)};
}

}  // namespace sidewidth
