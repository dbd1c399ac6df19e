#include "run_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "macrodimer/error.hpp"
#include "macrodimer/units.hpp"

namespace macrodimer::cli {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& j, std::string name, std::set<std::string> keys)
      : j_(j), name_(std::move(name)), keys_(std::move(keys)) {
    if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
    for (const auto& [key, _] : j_.items())
      if (!keys_.contains(key)) throw ConfigError(name_ + ": unknown key '" + key + "'");
    for (const auto& key : keys_)
      if (!j_.contains(key)) throw ConfigError(name_ + ": missing key '" + key + "'");
  }

  double number(const std::string& key) const {
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(name_ + "." + key + ": expected a number");
    return v.get<double>();
  }

  int integer(const std::string& key) const {
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(name_ + "." + key + ": expected an integer");
    return v.get<int>();
  }

  const json& at(const std::string& key) const { return j_.at(key); }
  const std::string& name() const { return name_; }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> keys_;
};

Vec3 vec3(const Section& s, const std::string& key) {
  const auto& v = s.at(key);
  if (!v.is_array() || v.size() != 3) throw ConfigError(s.name() + "." + key + ": expected [x, y, z]");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw ConfigError(s.name() + "." + key + ": expected numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

GridSettings parse_grids(const json& j) {
  const Section s(j, "grids",
                  {"r_min_um", "r_max_um", "r_points", "z_min_um", "z_max_um", "rho_max_um", "nz", "nrho",
                   "exposure_us"});
  GridSettings g;
  g.r_min = s.number("r_min_um");
  g.r_max = s.number("r_max_um");
  g.r_points = s.integer("r_points");
  g.z_min = s.number("z_min_um");
  g.z_max = s.number("z_max_um");
  g.rho_max = s.number("rho_max_um");
  g.nz = s.integer("nz");
  g.nrho = s.integer("nrho");
  g.exposure = s.number("exposure_us");
  if (!(g.r_max > g.r_min) || g.r_points < 3) throw ConfigError("grids: need r_max_um > r_min_um and r_points >= 3");
  if (!(g.z_max > g.z_min) || !(g.rho_max > 0) || g.nz < 1 || g.nrho < 1)
    throw ConfigError("grids: invalid probe grid");
  if (!(g.exposure > 0)) throw ConfigError("grids.exposure_us: must be positive");
  return g;
}

DragSettings parse_drag(const json& j) {
  const Section s(j, "drag",
                  {"alpha_ghz_per_um", "direction", "t_final_us", "dt_us", "rupture_factor", "axis_angle_rad",
                   "sweep_min_ghz_per_um", "sweep_max_ghz_per_um", "sweep_step_ghz_per_um"});
  DragSettings d;
  d.alpha = s.number("alpha_ghz_per_um");
  d.direction = vec3(s, "direction");
  d.t_final = s.number("t_final_us");
  d.dt = s.number("dt_us");
  d.rupture_factor = s.number("rupture_factor");
  d.axis_angle = s.number("axis_angle_rad");
  d.sweep_min = s.number("sweep_min_ghz_per_um");
  d.sweep_max = s.number("sweep_max_ghz_per_um");
  d.sweep_step = s.number("sweep_step_ghz_per_um");
  if (!(d.sweep_step > 0) || d.sweep_max < d.sweep_min) throw ConfigError("drag: invalid sweep range");
  return d;
}

SceneSettings parse_scene(const json& j) {
  const Section s(j, "scene",
                  {"x_min_um", "x_max_um", "z_min_um", "z_max_um", "rho_2d_um2", "pixel_um", "table_step_um",
                   "table_extent_um", "np_table_step_um", "np_table_extent_um", "link_radius_um",
                   "min_cluster_size", "impurities"});
  SceneSettings sc;
  sc.region = Region{s.number("x_min_um"), s.number("x_max_um"), s.number("z_min_um"), s.number("z_max_um")};
  sc.rho_2d = s.number("rho_2d_um2");
  sc.pixel = s.number("pixel_um");
  sc.table_step = s.number("table_step_um");
  sc.table_extent = s.number("table_extent_um");
  sc.np_table_step = s.number("np_table_step_um");
  sc.np_table_extent = s.number("np_table_extent_um");
  sc.link_radius = s.number("link_radius_um");
  sc.min_cluster_size = s.integer("min_cluster_size");
  if (sc.min_cluster_size < 1) throw ConfigError("scene.min_cluster_size: must be at least 1");
  const auto& list = s.at("impurities");
  if (!list.is_array()) throw ConfigError("scene.impurities: expected a list");
  sc.impurities.clear();
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Section imp(list[i], "scene.impurities[" + std::to_string(i) + "]",
                      {"kind", "x_um", "z_um", "orientation_rad"});
    if (!imp.at("kind").is_string()) throw ConfigError(imp.name() + ".kind: expected a string");
    try {
      sc.impurities.push_back(Impurity{parse_impurity(imp.at("kind").get<std::string>()),
                                       Vec2(imp.number("x_um"), imp.number("z_um")), imp.number("orientation_rad")});
    } catch (const InvalidArgument& e) {
      throw ConfigError(imp.name() + ".kind: " + e.what());
    }
  }
  return sc;
}

json grids_json(const GridSettings& g) {
  return json{{"r_min_um", g.r_min},  {"r_max_um", g.r_max},     {"r_points", g.r_points},
              {"z_min_um", g.z_min},  {"z_max_um", g.z_max},     {"rho_max_um", g.rho_max},
              {"nz", g.nz},           {"nrho", g.nrho},          {"exposure_us", g.exposure}};
}

json drag_json(const DragSettings& d) {
  return json{{"alpha_ghz_per_um", d.alpha},
              {"direction", {d.direction.x(), d.direction.y(), d.direction.z()}},
              {"t_final_us", d.t_final},
              {"dt_us", d.dt},
              {"rupture_factor", d.rupture_factor},
              {"axis_angle_rad", d.axis_angle},
              {"sweep_min_ghz_per_um", d.sweep_min},
              {"sweep_max_ghz_per_um", d.sweep_max},
              {"sweep_step_ghz_per_um", d.sweep_step}};
}

json scene_json(const SceneSettings& s) {
  json imps = json::array();
  for (const auto& imp : s.impurities)
    imps.push_back({{"kind", impurity_name(imp.kind)},
                    {"x_um", imp.position.x()},
                    {"z_um", imp.position.y()},
                    {"orientation_rad", imp.orientation}});
  return json{{"x_min_um", s.region.x_min},
              {"x_max_um", s.region.x_max},
              {"z_min_um", s.region.z_min},
              {"z_max_um", s.region.z_max},
              {"rho_2d_um2", s.rho_2d},
              {"pixel_um", s.pixel},
              {"table_step_um", s.table_step},
              {"table_extent_um", s.table_extent},
              {"np_table_step_um", s.np_table_step},
              {"np_table_extent_um", s.np_table_extent},
              {"link_radius_um", s.link_radius},
              {"min_cluster_size", s.min_cluster_size},
              {"impurities", imps}};
}

}  // namespace

DragConfig DragSettings::drag_config() const {
  DragConfig d;
  d.alpha = units::ghz_per_um(alpha);
  d.direction = direction;
  d.t_final = t_final;
  d.dt = dt;
  d.rupture_factor = rupture_factor;
  return d;
}

std::vector<double> DragSettings::sweep_grid() const {
  const auto n = static_cast<int>(std::floor((sweep_max - sweep_min) / sweep_step + 1e-9)) + 1;
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = units::ghz_per_um(sweep_min + sweep_step * i);
  return grid;
}

Scene RunConfig::make_scene() const {
  Scene s;
  s.impurities = scene.impurities;
  s.region = scene.region;
  s.rho_2d = scene.rho_2d;
  s.seed = seed;
  return s;
}

RunConfig run_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected an object at the top level");
  static const std::set<std::string> sections = {"physics", "grids", "drag", "scene", "seed"};
  for (const auto& [key, _] : j.items())
    if (!sections.contains(key)) throw ConfigError("config: unknown section '" + key + "'");

  RunConfig c;
  if (j.contains("physics")) c.physics = physical_config_from_json(j.at("physics").dump());
  if (j.contains("grids")) c.grids = parse_grids(j.at("grids"));
  if (j.contains("drag")) c.drag = parse_drag(j.at("drag"));
  if (j.contains("scene")) c.scene = parse_scene(j.at("scene"));
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError("seed: expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return run_config_from_json(buffer.str());
}

std::string run_config_to_json(const RunConfig& c, int indent) {
  json j;
  j["physics"] = json::parse(physical_config_to_json(c.physics));
  j["grids"] = grids_json(c.grids);
  j["drag"] = drag_json(c.drag);
  j["scene"] = scene_json(c.scene);
  j["seed"] = c.seed;
  return j.dump(indent);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace macrodimer::cli
