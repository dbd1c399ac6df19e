#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "macrodimer/model.hpp"

namespace macrodimer {

struct SectorLabel {
  int p_excitations = 1;
  // Twice the total jz; empty means the full excitation sector.
  std::optional<int> total_twice_jz;
};

/// Eigenvalue branches of the two-atom Hamiltonian with the atoms on the
/// z axis, ordered by eigenvector continuity rather than by energy.
struct BOSurface {
  std::vector<double> r_grid;  // um, ascending
  SectorLabel sector;
  std::shared_ptr<const ProductBasis> basis;
  Eigen::MatrixXd energies;  // rad/us, rows = grid points, cols = branches
  // Eigenvectors at each grid point, columns aligned with `energies`.
  std::vector<ComplexMatrix> vectors;
  // Smallest |<v(R_i)|v(R_i+1)>|^2 accepted during tracking.
  double min_overlap = 1.0;

  int branch_count() const { return static_cast<int>(energies.cols()); }
  Eigen::VectorXd branch(int k) const { return energies.col(k); }
};

struct WellDescriptor {
  double r_p = 0.0;        // um
  double depth = 0.0;      // rad/us
  double omega_vib = 0.0;  // rad/us
  double omega_rot = 0.0;  // rad/us
  int branch_id = 0;
  SectorLabel sector;
  double energy_min = 0.0;  // rad/us
  double barrier = 0.0;     // energy the depth is measured to
};

/// Uniform grid helper: [r_min, r_max] with `points` samples.
std::vector<double> linear_grid(double r_min, double r_max, int points);
/// Default separation grid used to locate the well: 0.8 r0 .. 12 r0, step 0.005 r0.
std::vector<double> default_well_grid(const PhysicalConfig& config);

/// Throws GridTooCoarse when consecutive eigenvectors cannot be matched with
/// overlap > 0.5, InvalidArgument for a non-ascending grid or R < 0.5 r0.
BOSurface bo_surface(const PhysicalConfig& config, const std::vector<double>& r_grid,
                     const SectorLabel& sector, int threads = 0);
/// One surface per total-jz sector of the two-atom one-excitation space.
std::vector<BOSurface> bo_surfaces(const PhysicalConfig& config, const std::vector<double>& r_grid,
                                   int threads = 0);

/// Deepest interior minimum over all branches of the surface, or empty.
std::optional<WellDescriptor> find_well(const BOSurface& surface, const PhysicalConfig& config);
/// Deepest well over all sectors of the default grid.
std::optional<WellDescriptor> locate_well(const PhysicalConfig& config, int threads = 0);

struct BoundState {
  double energy = 0.0;  // rad/us
  ComplexVector psi;    // in the full two-atom one-excitation basis (dimension 24)
  std::shared_ptr<const ProductBasis> basis;
  Geometry geometry;
};

/// Puts the largest-magnitude component on the positive real axis.
void fix_phase(ComplexVector& v);

/// Follows one eigenvector of a parametrized Hamiltonian H(s), s in [0, 1],
/// starting from `psi0` (an eigenvector of H(0)). Near-degenerate clusters are
/// handled by projecting onto the cluster subspace. Steps are halved until the
/// overlap with the previous vector exceeds 0.9; throws ContinuationLost when
/// the step falls below `min_step`.
struct ContinuationResult {
  double energy = 0.0;
  ComplexVector psi;
  int steps = 0;
  double min_overlap = 1.0;
};
ContinuationResult continue_eigenvector(const std::function<ComplexMatrix(double)>& hamiltonian,
                                        const ComplexVector& psi0, int initial_steps = 1,
                                        double min_step = 1e-6);

/// Finds and follows the molecular bound state. Built once per config; the
/// reference state is the well eigenvector at (0, 0, +-r_p/2).
class BoundStateTracker {
 public:
  explicit BoundStateTracker(const PhysicalConfig& config, int threads = 0);
  BoundStateTracker(const PhysicalConfig& config, const WellDescriptor& well);

  const WellDescriptor& well() const { return well_; }
  const InteractionModel& model() const { return *model_; }
  const BoundState& reference() const { return reference_; }

  /// Continuation from `from` (default: the reference) to `geometry`. With a
  /// field, the state is the one of H0 + U; `from` must then already be a
  /// state of the same field.
  BoundState solve(const Geometry& geometry, const BoundState* from = nullptr,
                   const AppliedField* field = nullptr) const;
  /// Bound state of H0 + U at a fixed geometry, continued in the field strength
  /// from the field-free bound state `base`.
  BoundState solve_with_field(const BoundState& base, const AppliedField& field) const;

 private:
  void init_reference();

  WellDescriptor well_;
  std::shared_ptr<const InteractionModel> model_;
  BoundState reference_;
};

BoundState bound_state(const PhysicalConfig& config, const Geometry& geometry);

}  // namespace macrodimer
