#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uavlc/errors.hpp"
#include "uavlc/model.hpp"

namespace uavlc {

using nlohmann::json;

namespace {

// Deterministic per-entity draws: splitmix64 on (seed, kind, index). Keeping
// each entity on its own stream means growing a count leaves earlier
// entities untouched, which lets sweep cells share drops across values.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_draw(std::uint64_t seed, std::uint64_t kind, std::uint64_t index,
                 std::uint64_t lane) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(kind * 0x9e3779b97f4a7c15ULL + index));
  h = splitmix64(h + lane);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

const json& require(const json& node, const char* key, const std::string& path) {
  auto it = node.find(key);
  if (it == node.end()) throw SchemaError("missing field: " + path + key);
  return *it;
}

double number(const json& node, const char* key, const std::string& path) {
  const json& v = require(node, key, path);
  if (!v.is_number()) throw SchemaError("field is not a number: " + path + key);
  return v.get<double>();
}

int integer(const json& node, const char* key, const std::string& path) {
  const json& v = require(node, key, path);
  if (!v.is_number_integer()) throw SchemaError("field is not an integer: " + path + key);
  return v.get<int>();
}

Eigen::Matrix2Xd point_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw SchemaError("field is not an array: " + path);
  Eigen::Matrix2Xd pts(2, v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const json& p = v[k];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw SchemaError("expected [x, y] pair at " + path + "[" + std::to_string(k) + "]");
    pts(0, k) = p[0].get<double>();
    pts(1, k) = p[1].get<double>();
  }
  return pts;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("scenario root must be an object");

  Scenario s;
  s.uav_count = integer(root, "uav_count", "");
  s.uav_altitude = number(root, "uav_altitude", "");
  s.users = point_list(require(root, "users", ""), "users");
  {
    const json& d = require(root, "illumination_demands", "");
    if (!d.is_array()) throw SchemaError("illumination_demands must be an array");
    s.illumination_demands.resize(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (!d[k].is_number())
        throw SchemaError("illumination_demands[" + std::to_string(k) + "] is not a number");
      s.illumination_demands(k) = d[k].get<double>();
    }
  }
  s.ris_list = point_list(require(root, "ris_list", ""), "ris_list");
  s.ris_height = number(root, "ris_height", "");
  s.ris_elements = integer(root, "ris_elements", "");
  {
    const json& a = require(root, "area", "");
    if (!a.is_array() || a.size() != 2)
      throw SchemaError("area must be [width, height]");
    s.area = Eigen::Vector2d(a[0].get<double>(), a[1].get<double>());
  }
  s.min_separation = number(root, "min_separation", "");
  s.rate_requirement = number(root, "rate_requirement", "");

  const json& v = require(root, "vlc", "");
  if (!v.is_object()) throw SchemaError("vlc must be an object");
  s.vlc.semi_angle_half_power = number(v, "semi_angle_half_power", "vlc.");
  s.vlc.pd_area = number(v, "pd_area", "vlc.");
  s.vlc.fov = number(v, "fov", "vlc.");
  s.vlc.refractive_index = number(v, "refractive_index", "vlc.");
  s.vlc.responsivity = number(v, "responsivity", "vlc.");
  s.vlc.noise_power = number(v, "noise_power", "vlc.");
  s.vlc.carrier_wavelength = number(v, "carrier_wavelength", "vlc.");
  s.vlc.element_spacing = v.contains("element_spacing")
                              ? number(v, "element_spacing", "vlc.")
                              : s.vlc.carrier_wavelength / 2.0;

  validate(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
  json root;
  root["uav_count"] = s.uav_count;
  root["uav_altitude"] = s.uav_altitude;
  json users = json::array();
  for (int j = 0; j < s.user_count(); ++j)
    users.push_back({s.users(0, j), s.users(1, j)});
  root["users"] = users;
  root["illumination_demands"] =
      std::vector<double>(s.illumination_demands.data(),
                          s.illumination_demands.data() + s.illumination_demands.size());
  json ris = json::array();
  for (int l = 0; l < s.ris_count(); ++l)
    ris.push_back({s.ris_list(0, l), s.ris_list(1, l)});
  root["ris_list"] = ris;
  root["ris_height"] = s.ris_height;
  root["ris_elements"] = s.ris_elements;
  root["area"] = {s.area.x(), s.area.y()};
  root["min_separation"] = s.min_separation;
  root["rate_requirement"] = s.rate_requirement;
  root["vlc"] = {{"semi_angle_half_power", s.vlc.semi_angle_half_power},
                 {"pd_area", s.vlc.pd_area},
                 {"fov", s.vlc.fov},
                 {"refractive_index", s.vlc.refractive_index},
                 {"responsivity", s.vlc.responsivity},
                 {"noise_power", s.vlc.noise_power},
                 {"carrier_wavelength", s.vlc.carrier_wavelength},
                 {"element_spacing", s.vlc.element_spacing}};
  return root.dump(2);
}

Scenario random_scenario(const Scenario& base, std::uint64_t seed,
                         const RandomCounts& counts) {
  Scenario s = base;
  if (counts.uavs > 0) s.uav_count = counts.uavs;
  if (counts.elements > 0) s.ris_elements = counts.elements;
  const int nu = counts.users >= 0 ? counts.users : base.user_count();
  const int nr = counts.ris >= 0 ? counts.ris : base.ris_count();

  s.users.resize(2, nu);
  s.illumination_demands.resize(nu);
  for (int j = 0; j < nu; ++j) {
    s.users(0, j) = unit_draw(seed, 1, j, 0) * s.area.x();
    s.users(1, j) = unit_draw(seed, 1, j, 1) * s.area.y();
    s.illumination_demands(j) =
        counts.demand_low + unit_draw(seed, 2, j, 0) * (counts.demand_high - counts.demand_low);
  }
  s.ris_list.resize(2, nr);
  for (int l = 0; l < nr; ++l) {
    s.ris_list(0, l) = unit_draw(seed, 3, l, 0) * s.area.x();
    s.ris_list(1, l) = unit_draw(seed, 3, l, 1) * s.area.y();
  }
  validate(s);
  return s;
}

}  // namespace uavlc
