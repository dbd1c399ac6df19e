#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "macrodimer/eit.hpp"
#include "macrodimer/error.hpp"
#include "macrodimer/imaging.hpp"
#include "macrodimer/raster.hpp"
#include "macrodimer/units.hpp"
#include "run_config.hpp"

namespace macrodimer::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

enum class Format { csv, json };

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  Format format = Format::csv;
};

// Everything a command needs, plus the list of files it produced.
class Run {
 public:
  Run(std::string command, std::vector<std::string> args, const Options& opt, std::ostream& out)
      : command_(std::move(command)), args_(std::move(args)), opt_(opt), out_(out) {
    config_ = opt.config_path.empty() ? RunConfig{} : load_run_config(opt.config_path);
    if (opt.seed) config_.seed = *opt.seed;
    dir_ = opt.out_dir;
    if (dir_.empty()) {
      const char* env = std::getenv("MACRODIMER_OUT");
      dir_ = (env && *env) ? fs::path(env) : fs::path("out");
    }
    fs::create_directories(dir_);
    hash_ = hex64(fnv1a64(run_config_to_json(config_)));
  }

  const RunConfig& config() const { return config_; }
  const PhysicalConfig& physics() const { return config_.physics; }
  int threads() const { return opt_.threads; }
  Format format() const { return opt_.format; }
  const std::string& config_hash() const { return hash_; }
  std::ostream& out() { return out_; }

  fs::path file(const std::string& name) {
    outputs_.push_back(name);
    return dir_ / name;
  }

  void write_text(const std::string& name, const std::string& text) {
    std::ofstream f(file(name), std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << text;
  }

  void write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }

  void add_seed(std::uint64_t s) { seeds_.push_back(s); }

  void finish(const json& extra = json::object()) {
    json m;
    m["tool"] = "macrodimer";
    m["version"] = kToolVersion;
    m["command"] = command_;
    m["arguments"] = args_;
    m["config_hash"] = "fnv1a64:" + hash_;
    m["config"] = json::parse(run_config_to_json(config_));
    m["seeds"] = seeds_;
    m["outputs"] = outputs_;
    m["timestamp"] = timestamp();
    for (const auto& [k, v] : extra.items()) m[k] = v;
    const std::string name = command_ + "_manifest.json";
    std::ofstream f(dir_ / name, std::ios::binary);
    f << m.dump(2) << "\n";
    out_ << "wrote " << outputs_.size() << " file(s) and " << name << " to " << dir_.string() << "\n";
  }

 private:
  static std::string timestamp() {
    std::time_t t = 0;
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) {
      t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    } else {
      t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::string command_;
  std::vector<std::string> args_;
  Options opt_;
  std::ostream& out_;
  RunConfig config_;
  fs::path dir_;
  std::string hash_;
  std::vector<std::string> outputs_;
  std::vector<std::uint64_t> seeds_;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string csv() const {
    std::string s;
    for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
    s += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) s += ",";
        s += num(r[i]);
      }
      s += "\n";
    }
    return s;
  }

  json as_json() const { return json{{"columns", columns}, {"rows", rows}}; }
};

void write_table(Run& run, const std::string& stem, const Table& t) {
  if (run.format() == Format::csv) {
    run.write_text(stem + ".csv", t.csv());
  } else {
    run.write_json(stem + ".json", t.as_json());
  }
}

void write_images(Run& run, const std::string& stem, const Eigen::MatrixXd& values, double lo, double hi) {
  const GrayImage img = to_gray(values, lo, hi);
  write_pgm(run.file(stem + ".pgm"), img);
  write_png(run.file(stem + ".png"), img);
}

double h_mhz(double omega) { return units::to_mhz(omega); }

json vec_json(const Vec3& v) { return json{v.x(), v.y(), v.z()}; }
json vec_json(const Vec2& v) { return json{v.x(), v.y()}; }

json well_json(const WellDescriptor& w) {
  return json{{"r_p_um", w.r_p},
              {"depth_h_mhz", h_mhz(w.depth)},
              {"omega_vib_2pi_mhz", h_mhz(w.omega_vib)},
              {"omega_rot_2pi_khz", h_mhz(w.omega_rot) * 1e3},
              {"branch_id", w.branch_id},
              {"twice_total_jz", w.sector.total_twice_jz ? json(*w.sector.total_twice_jz) : json(nullptr)},
              {"energy_min_h_mhz", h_mhz(w.energy_min)},
              {"barrier_h_mhz", h_mhz(w.barrier)}};
}

int cmd_scales(Run& run) {
  const auto s = characteristic_scales(run.physics());
  const auto d = validate_density(run.physics(), run.config().scene.rho_2d, run.config().scene.link_radius);
  const json j{{"r0_um", s.r0},
               {"r0_derived_um", s.r0_derived},
               {"c3_h_mhz_um3", h_mhz(s.c3)},
               {"omega_at_r0_h_mhz", h_mhz(s.omega_of_r(s.r0))},
               {"vdw_radius_um", d.rc_prime},
               {"snr_density_bound_um2", d.snr_bound},
               {"snr_ok", d.snr_ok},
               {"dilute_factor", d.dilute_factor},
               {"dilute_ok", d.dilute_ok},
               {"temperature_of_100_h_mhz_mk", units::convert(100.0, units::Unit::h_mhz, units::Unit::millikelvin)}};
  run.write_json("scales.json", j);
  run.out() << j.dump(2) << "\n";
  run.finish();
  return 0;
}

int cmd_potential(Run& run) {
  const auto& g = run.config().grids;
  const auto grid = linear_grid(g.r_min, g.r_max, g.r_points);
  const auto surfaces = bo_surfaces(run.physics(), grid, run.threads());

  std::optional<WellDescriptor> best;
  std::size_t best_surface = 0;
  for (std::size_t s = 0; s < surfaces.size(); ++s) {
    const auto w = find_well(surfaces[s], run.physics());
    if (w && (!best || w->depth > best->depth)) {
      best = w;
      best_surface = s;
    }
  }

  Table t{{"R [um]", "twice_M [1]", "branch [1]", "E [h MHz]", "tracked [1]"}, {}};
  for (std::size_t s = 0; s < surfaces.size(); ++s) {
    const auto& surf = surfaces[s];
    const double m = surf.sector.total_twice_jz ? *surf.sector.total_twice_jz : 0.0;
    for (std::size_t i = 0; i < surf.r_grid.size(); ++i)
      for (int k = 0; k < surf.branch_count(); ++k) {
        const bool tracked = best && s == best_surface && k == best->branch_id;
        t.rows.push_back({surf.r_grid[i], m, static_cast<double>(k),
                          h_mhz(surf.energies(static_cast<Eigen::Index>(i), k)), tracked ? 1.0 : 0.0});
      }
  }
  write_table(run, "potential", t);
  run.write_json("well.json", best ? well_json(*best) : json(nullptr));
  if (best) {
    run.out() << "well: r_p = " << num(best->r_p) << " um, depth = " << num(h_mhz(best->depth))
              << " h MHz, omega_vib = 2pi x " << num(h_mhz(best->omega_vib)) << " MHz\n";
  } else {
    run.out() << "no bound branch on this grid\n";
  }
  run.finish();
  return 0;
}

json axes_json(const std::vector<double>& z, const std::vector<double>& rho, const std::string& quantity,
               double lo, double hi) {
  return json{{"quantity", quantity},
              {"gray_range", {lo, hi}},
              {"horizontal", {{"name", "rho"}, {"unit", "um"}, {"first", rho.front()}, {"last", rho.back()},
                              {"count", rho.size()}}},
              {"vertical", {{"name", "z"}, {"unit", "um"}, {"first", z.front()}, {"last", z.back()},
                            {"count", z.size()}, {"bottom_row", "first"}}},
              {"molecule_axis", "z"}};
}

int cmd_chi_map(Run& run) {
  const auto& g = run.config().grids;
  const BoundStateTracker tracker(run.physics(), run.threads());
  const MoleculeProbe probe(run.physics(), tracker.reference());
  const auto z = cell_centred_grid(g.z_min, g.z_max, g.nz);
  const auto rho = cell_centred_grid(0.0, g.rho_max, g.nrho);
  const auto field = chi_map(probe, z, rho, run.threads());

  Table t{{"z [um]", "rho [um]", "Re chi [1]", "Im chi [1]"}, {}};
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = 0; j < rho.size(); ++j) {
      const auto c = field.chi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      t.rows.push_back({z[i], rho[j], c.real(), c.imag()});
    }
  write_table(run, "chi_map", t);
  write_images(run, "chi_map", field.chi.imag(), 0.0, 1.0);
  json side = axes_json(z, rho, "Im chi", 0.0, 1.0);
  side["r_p_um"] = tracker.well().r_p;
  run.write_json("chi_map_axes.json", side);
  run.finish();
  return 0;
}

int cmd_pop_map(Run& run) {
  const auto& g = run.config().grids;
  const BoundStateTracker tracker(run.physics(), run.threads());
  const MoleculeProbe probe(run.physics(), tracker.reference());
  const auto z = cell_centred_grid(g.z_min, g.z_max, g.nz);
  const auto rho = cell_centred_grid(0.0, g.rho_max, g.nrho);
  const auto field = population_map(probe, z, rho, g.exposure, run.threads());

  Table t{{"z [um]", "rho [um]", "p_gprime [1]"}, {}};
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = 0; j < rho.size(); ++j)
      t.rows.push_back({z[i], rho[j], field.p_gprime(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
  write_table(run, "pop_map", t);
  write_images(run, "pop_map", field.p_gprime, 0.0, 1.0);
  json side = axes_json(z, rho, "g' population", 0.0, 1.0);
  side["exposure_us"] = g.exposure;
  side["r_p_um"] = tracker.well().r_p;
  run.write_json("pop_map_axes.json", side);
  run.finish();
  return 0;
}

int cmd_drag(Run& run) {
  const auto& ds = run.config().drag;
  const BoundStateTracker tracker(run.physics(), run.threads());
  const DragConfig drag = ds.drag_config();
  const auto traj = integrate(tracker, equilibrium_start(tracker.well(), ds.axis_angle), drag);

  Table t{{"t [us]", "x1 [um]", "y1 [um]", "z1 [um]", "x2 [um]", "y2 [um]", "z2 [um]", "separation [um]",
           "com_x [um]", "com_y [um]", "com_z [um]", "energy [h MHz]", "mechanical_energy [h MHz]"},
          {}};
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& p = traj.positions[i];
    t.rows.push_back({traj.times[i], p[0].x(), p[0].y(), p[0].z(), p[1].x(), p[1].y(), p[1].z(),
                      traj.separation[i], traj.com[i].x(), traj.com[i].y(), traj.com[i].z(),
                      h_mhz(traj.energy[i]), h_mhz(traj.mechanical_energy[i])});
  }
  write_table(run, "trajectory", t);

  const auto sum = summarize(traj, drag.alpha, drag.direction);
  const Vec3 free = free_ns_displacement(run.physics(), drag);
  double drift = 0.0;
  for (double e : traj.energy) drift = std::max(drift, std::abs(e - traj.energy.front()));
  const json j{{"alpha_h_ghz_per_um", ds.alpha},
               {"direction", vec_json(drag.direction.normalized())},
               {"ruptured", traj.ruptured},
               {"rupture_time_us", traj.ruptured ? json(traj.rupture_time) : json(nullptr)},
               {"final_time_us", traj.times.back()},
               {"com_displacement_um", std::abs(sum.com_displacement)},
               {"free_ns_displacement_um", free.norm()},
               {"max_relative_displacement_um", sum.max_relative_displacement},
               {"oscillation_frequency_mhz", sum.oscillation_frequency},
               {"adiabatic_overlap",
                adiabatic_overlap(tracker, tracker.reference().geometry, drag.alpha, drag.direction)},
               {"min_step_overlap", traj.min_step_overlap},
               {"energy_drift_h_mhz", h_mhz(drift)},
               {"well", well_json(tracker.well())}};
  run.write_json("drag.json", j);
  run.out() << "com displacement " << num(std::abs(sum.com_displacement)) << " um"
            << (traj.ruptured ? ", ruptured at t = " + num(traj.rupture_time) + " us" : ", bound") << "\n";
  run.finish();
  return 0;
}

int cmd_sweep(Run& run) {
  const auto& ds = run.config().drag;
  const BoundStateTracker tracker(run.physics(), run.threads());
  const auto sweep = rupture_sweep(tracker, ds.sweep_grid(), ds.t_final, ds.axis_angle, run.threads());

  Table t{{"alpha [h GHz/um]", "max_relative_displacement [um]", "ruptured [1]", "frequency [MHz]",
           "com_displacement [um]", "continuation_lost [1]"},
          {}};
  for (const auto& s : sweep)
    t.rows.push_back({units::to_ghz_per_um(s.alpha), s.max_relative_displacement, s.ruptured ? 1.0 : 0.0,
                      s.oscillation_frequency, std::abs(s.com_displacement), s.continuation_lost ? 1.0 : 0.0});
  write_table(run, "sweep", t);
  const auto threshold = rupture_threshold(sweep);
  const json j{{"rupture_threshold_h_ghz_per_um",
                threshold ? json(units::to_ghz_per_um(*threshold)) : json(nullptr)},
               {"t_final_us", ds.t_final},
               {"axis_angle_rad", ds.axis_angle},
               {"points", sweep.size()}};
  run.write_json("sweep_summary.json", j);
  run.out() << "rupture threshold: "
            << (threshold ? num(units::to_ghz_per_um(*threshold)) + " h GHz/um" : std::string("none in range"))
            << "\n";
  run.finish();
  return 0;
}

ImagingTables build_tables(Run& run, const BoundStateTracker& tracker) {
  TableOptions opt;
  opt.step = run.config().scene.table_step;
  opt.extent = run.config().scene.table_extent;
  opt.np_step = run.config().scene.np_table_step;
  opt.np_extent = run.config().scene.np_table_extent;
  return ImagingTables::build(run.physics(), tracker, run.config().grids.exposure, opt, run.threads());
}

json scene_json(const Scene& s) {
  json imps = json::array();
  for (const auto& imp : s.impurities)
    imps.push_back({{"kind", impurity_name(imp.kind)},
                    {"position_um", vec_json(imp.position)},
                    {"orientation_rad", imp.orientation}});
  return json{{"impurities", imps},
              {"region_um", {s.region.x_min, s.region.x_max, s.region.z_min, s.region.z_max}},
              {"rho_2d_um2", s.rho_2d},
              {"seed", s.seed}};
}

json frame_json(const ImageFrame& f, const Scene& s, const std::string& hash) {
  json atoms = json::array();
  for (const auto& p : f.gprime_atoms) atoms.push_back(vec_json(p));
  return json{{"seed", s.seed},
              {"config_hash", "fnv1a64:" + hash},
              {"scene", scene_json(s)},
              {"pixel_um", f.pixel_size},
              {"nx", f.nx},
              {"nz", f.nz},
              {"bottom_row", "z_min"},
              {"probe_atoms", f.probe_atoms},
              {"excluded_atoms", f.excluded_atoms},
              {"gprime_count", f.gprime_atoms.size()},
              {"gprime_atoms_um", atoms}};
}

void write_frame(Run& run, const std::string& stem, const ImageFrame& f) {
  const double hi = std::max(1, f.counts.maxCoeff());
  write_images(run, stem, f.counts.cast<double>(), 0.0, hi);
  Table t{{}, {}};
  for (int x = 0; x < f.nx; ++x) t.columns.push_back("col" + std::to_string(x) + " [count]");
  for (int z = 0; z < f.nz; ++z) {
    std::vector<double> row;
    for (int x = 0; x < f.nx; ++x) row.push_back(f.counts(z, x));
    t.rows.push_back(std::move(row));
  }
  write_table(run, stem + "_counts", t);
}

int cmd_image(Run& run) {
  const BoundStateTracker tracker(run.physics(), run.threads());
  const auto tables = build_tables(run, tracker);
  const Scene scene = run.config().make_scene();
  run.add_seed(scene.seed);
  const auto frame = render_frame(tables, scene, run.config().scene.pixel);
  write_frame(run, "frame", frame);
  run.write_json("frame.json", frame_json(frame, scene, run.config_hash()));
  run.out() << frame.gprime_atoms.size() << " g' atoms out of " << frame.probe_atoms << " probes\n";
  run.finish();
  return 0;
}

int cmd_classify(Run& run) {
  const auto& cfg = run.config();
  const BoundStateTracker tracker(run.physics(), run.threads());
  const auto tables = build_tables(run, tracker);
  const DragConfig drag = cfg.drag.drag_config();
  const Scene before = cfg.make_scene();
  const Scene after = advance_scene(before, drag, run.physics());
  run.add_seed(before.seed);
  run.add_seed(after.seed);
  const auto f1 = render_frame(tables, before, cfg.scene.pixel);
  const auto f2 = render_frame(tables, after, cfg.scene.pixel);
  write_frame(run, "frame_before", f1);
  write_frame(run, "frame_after", f2);
  run.write_json("frames.json", json{{"before", frame_json(f1, before, run.config_hash())},
                                     {"after", frame_json(f2, after, run.config_hash())},
                                     {"probe_atoms_resampled", true}});

  ClassifyOptions opt;
  opt.link_radius = cfg.scene.link_radius;
  opt.min_cluster_size = static_cast<std::size_t>(cfg.scene.min_cluster_size);
  const auto result = classify_spots(f1, f2, drag, run.physics(), opt);
  json spots = json::array();
  for (const auto& s : result.clusters)
    spots.push_back({{"label", spot_label_name(s.label)},
                     {"centroid_before_um", vec_json(s.centroid_before)},
                     {"centroid_after_um", s.centroid_after ? vec_json(*s.centroid_after) : json(nullptr)},
                     {"atoms_before", s.atoms_before},
                     {"displacement_um", s.displacement}});
  run.write_json("classification.json",
                 json{{"expected_molecule_displacement_um", result.expected_displacement},
                      {"drag_alpha_h_ghz_per_um", cfg.drag.alpha},
                      {"drag_time_us", cfg.drag.t_final},
                      {"spots", spots}});
  for (const auto& s : result.clusters)
    run.out() << spot_label_name(s.label) << " at (" << num(s.centroid_before.x()) << ", "
              << num(s.centroid_before.y()) << ") um\n";
  run.finish({{"probe_atoms_resampled", true}});
  return 0;
}

int exit_code_for(const Error& e) {
  return dynamic_cast<const ConfigError*>(&e) ? 2 : 3;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rydberg macrodimer simulations: potentials, probe response, dragging and imaging", "macrodimer"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Options opt;
  std::string format = "csv";
  std::uint64_t seed = 0;
  app.add_option("--config", opt.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", opt.out_dir, "output directory (default $MACRODIMER_OUT or ./out)");
  auto* seed_opt = app.add_option("--seed", seed, "override the configured seed");
  app.add_option("--threads", opt.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.add_option("--format", format, "tabular output format")->check(CLI::IsMember({"csv", "json"}));

  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(Run&);
  };
  const std::vector<Entry> commands = {
      {"scales", "characteristic length, coupling and density scales", cmd_scales},
      {"potential", "Born-Oppenheimer curves and the molecular well", cmd_potential},
      {"chi-map", "probe susceptibility around the molecule", cmd_chi_map},
      {"pop-map", "g' population after the exposure", cmd_pop_map},
      {"drag", "trajectory under a linear energy shift of the ns state", cmd_drag},
      {"sweep", "rupture sweep over the force slope", cmd_sweep},
      {"image", "one simulated fluorescence frame", cmd_image},
      {"classify", "two frames before/after a drag and spot classification", cmd_classify},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) subs.push_back(app.add_subcommand(c.name, c.help));

  auto* units_cmd = app.add_subcommand("units", "convert between h MHz, h GHz/um, pN, mK, uK and rad/us");
  double value = 0.0;
  std::string from, to;
  units_cmd->add_option("value", value)->required();
  units_cmd->add_option("from", from)->required();
  units_cmd->add_option("to", to)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return 1;
  }
  opt.format = format == "json" ? Format::json : Format::csv;
  if (*seed_opt) opt.seed = seed;

  try {
    if (units_cmd->parsed()) {
      const double v = units::convert(value, from, to);
      if (opt.format == Format::json) {
        out << json{{"value", value}, {"from", from}, {"to", to}, {"result", v}}.dump() << "\n";
      } else {
        out << num(v) << " " << to << "\n";
      }
      return 0;
    }
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      Run r(commands[i].name, args, opt, out);
      return commands[i].fn(r);
    }
  } catch (const Error& e) {
    err << "macrodimer: " << e.category() << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "macrodimer: failure: " << e.what() << "\n";
    return 4;
  }
  err << app.help();
  return 1;
}

}  // namespace macrodimer::cli
