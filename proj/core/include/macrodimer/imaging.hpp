#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "macrodimer/dynamics.hpp"
#include "macrodimer/eit.hpp"

namespace macrodimer {

// Image-plane coordinates are (x, z) in um; z is the quantization axis and
// the default drag axis.
using Vec2 = Eigen::Vector2d;

enum class ImpurityKind { molecule, ns_atom, np_atom };
std::string impurity_name(ImpurityKind kind);
ImpurityKind parse_impurity(const std::string& name);

struct Impurity {
  ImpurityKind kind = ImpurityKind::molecule;
  Vec2 position = Vec2::Zero();
  double orientation = 0.0;  // molecule axis angle from z, in the image plane (rad)
};

struct Region {
  double x_min = 0.0, x_max = 0.0, z_min = 0.0, z_max = 0.0;

  double area() const { return (x_max - x_min) * (z_max - z_min); }
  bool contains(const Vec2& p) const { return p.x() >= x_min && p.x() <= x_max && p.y() >= z_min && p.y() <= z_max; }
  void validate() const;
};

struct Scene {
  std::vector<Impurity> impurities;
  Region region;
  double rho_2d = 1.0;  // um^-2
  std::uint64_t seed = 0;

  void validate() const;
};

/// Homogeneous Poisson point process on the region.
std::vector<Vec2> sample_probe_atoms(const Region& region, double rho_2d, std::uint64_t seed);

/// Bilinear table of the g'-state probability on (|z|, rho); zero beyond the
/// tabulated extent.
class GprimeTable {
 public:
  GprimeTable() = default;
  GprimeTable(double step, Eigen::MatrixXd values);

  double operator()(double z, double rho) const;
  double step() const { return step_; }
  double extent() const { return step_ * static_cast<double>(values_.cols() - 1); }
  const Eigen::MatrixXd& values() const { return values_; }

 private:
  double step_ = 1.0;
  Eigen::MatrixXd values_;  // rows: |z| = i * step, cols: rho = j * step
};

struct TableOptions {
  double step = 0.5;    // um
  double extent = 8.0;  // um
  // The resonant exchange with a free np atom falls off as 1/R^3, so its
  // table reaches further on a coarser grid.
  double np_step = 1.0;
  double np_extent = 16.0;
  LindbladOptions lindblad;
};

/// Impurity-induced g' probabilities after an exposure: the population map
/// with the far-field (bare EIT transient) value removed,
/// p = (p_map - p_far) / (1 - p_far), clipped to [0, 1].
struct ImagingTables {
  GprimeTable molecule;
  GprimeTable ns_atom;
  GprimeTable np_atom;
  double exposure = 2.0;
  double r_p = 0.0;  // molecule separation used for the molecule table

  static ImagingTables build(const PhysicalConfig& config, const BoundStateTracker& tracker, double exposure = 2.0,
                             const TableOptions& options = {}, int threads = 0);
  const GprimeTable& table(ImpurityKind kind) const;
};

struct ImageFrame {
  Region region;
  double pixel_size = 0.5;  // um
  int nx = 0;
  int nz = 0;
  Eigen::MatrixXi counts;  // rows: z, cols: x
  std::vector<Vec2> gprime_atoms;
  std::size_t probe_atoms = 0;
  std::size_t excluded_atoms = 0;  // probes closer than 0.1 um to an impurity atom
};

ImageFrame render_frame(const ImagingTables& tables, const Scene& scene, double pixel_size = 0.5);

struct DensityCheck {
  double rc_prime = 0.0;   // um
  double snr_bound = 0.0;  // um^-2
  bool snr_ok = false;
  double dilute_factor = 0.0;
  bool dilute_ok = false;
};

DensityCheck validate_density(const PhysicalConfig& config, double rho_2d, double rc = 3.0);

enum class SpotLabel { molecule, ns_atom, np_atom, unresolved };
std::string spot_label_name(SpotLabel label);

struct Spot {
  Vec2 centroid_before = Vec2::Zero();
  std::optional<Vec2> centroid_after;
  std::size_t atoms_before = 0;
  double displacement = 0.0;  // um along the expected drift direction
  SpotLabel label = SpotLabel::unresolved;
};

struct ClassifiedSpots {
  std::vector<Spot> clusters;
  double expected_displacement = 0.0;  // molecule displacement d, um
};

struct ClassifyOptions {
  double link_radius = 3.0;  // R_c, um
  std::size_t min_cluster_size = 3;
};

/// Single-linkage clusters of points (indices into `points`).
std::vector<std::vector<std::size_t>> cluster_points(const std::vector<Vec2>& points, double link_radius);

/// Molecule centre-of-mass displacement in the image plane after the drag.
Vec2 molecule_displacement(const PhysicalConfig& config, const DragConfig& drag);

ClassifiedSpots classify_spots(const ImageFrame& before, const ImageFrame& after, const DragConfig& drag,
                               const PhysicalConfig& config, const ClassifyOptions& options = {});

/// Moves impurities by the drag (molecule d, ns atom 2d, np atom 0) and derives
/// a fresh probe seed for the second exposure.
Scene advance_scene(const Scene& scene, const DragConfig& drag, const PhysicalConfig& config);
std::uint64_t second_frame_seed(std::uint64_t seed);

}  // namespace macrodimer
