#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "macrodimer/config.hpp"
#include "macrodimer/dynamics.hpp"
#include "macrodimer/imaging.hpp"

namespace macrodimer::cli {

// Separation grid for `potential`, probe grid for the maps.
struct GridSettings {
  double r_min = 0.8;  // um
  double r_max = 12.0;
  int r_points = 2241;
  double z_min = -8.0;
  double z_max = 8.0;
  double rho_max = 8.0;
  int nz = 60;
  int nrho = 60;
  double exposure = 2.0;  // us, pop-map and imaging tables
};

struct DragSettings {
  double alpha = 0.08;  // h GHz/um
  Vec3 direction = Vec3::UnitZ();
  double t_final = 10.0;  // us
  double dt = 0.0;        // us, 0 = default step
  double rupture_factor = 3.0;
  double axis_angle = 0.0;  // rad
  double sweep_min = 0.02;  // h GHz/um
  double sweep_max = 0.2;
  double sweep_step = 0.005;

  DragConfig drag_config() const;
  std::vector<double> sweep_grid() const;  // rad/us per um
};

struct SceneSettings {
  Region region{-40.0, 40.0, -20.0, 25.0};
  double rho_2d = 1.0;
  double pixel = 0.5;
  double table_step = 0.5;
  double table_extent = 8.0;
  double np_table_step = 1.0;
  double np_table_extent = 16.0;
  double link_radius = 3.0;
  int min_cluster_size = 3;
  std::vector<Impurity> impurities{
      {ImpurityKind::molecule, Vec2(-25.0, 10.0), 0.0},
      {ImpurityKind::ns_atom, Vec2(0.0, 15.0), 0.0},
      {ImpurityKind::np_atom, Vec2(25.0, 0.0), 0.0},
  };
};

struct RunConfig {
  PhysicalConfig physics;
  GridSettings grids;
  DragSettings drag;
  SceneSettings scene;
  std::uint64_t seed = 1;

  Scene make_scene() const;
};

/// Sections physics, grids, drag, scene and the top-level seed are optional;
/// a section that is present must list every key. Unknown keys are errors.
RunConfig run_config_from_json(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Canonical dump: sorted keys, compact, every section expanded.
std::string run_config_to_json(const RunConfig& config, int indent = -1);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace macrodimer::cli
