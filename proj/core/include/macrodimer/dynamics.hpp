#pragma once

#include <array>
#include <optional>
#include <vector>

#include "macrodimer/potential.hpp"

namespace macrodimer {

struct DragConfig {
  double alpha = 0.0;  // rad/us per um
  Vec3 direction = Vec3::UnitZ();
  double t_final = 10.0;  // us
  double dt = 0.0;        // us; 0 selects (2 pi / omega_vib) / 200
  double rupture_factor = 3.0;  // rupture when separation > factor * r_p

  void validate() const;
};

struct DressingProfile {
  double detuning_d = 0.0;   // rad/us
  double rabi_max = 0.0;     // rad/us
  double ramp_length = 0.0;  // um

  void validate() const;
  /// u(z) = Omega_R(z)^2 / (4 Delta_d) with Omega_R rising linearly over the ramp.
  double shift(double z) const;
};

struct DressingForce {
  double alpha = 0.0;         // rad/us per um
  double depopulation = 0.0;  // probability
};

DressingForce dressing_force_profile(const DressingProfile& profile);

struct ForceEvaluation {
  std::array<Vec3, 2> forces;  // rad/us per um
  std::array<double, 2> ns_weight{};
  double energy = 0.0;          // <psi|H0|psi>
  double applied_energy = 0.0;  // <psi|U1 + U2|psi>
  BoundState state;
};

/// F_i = -<psi|grad_i V|psi> - alpha * direction * w_i, where psi is the
/// bound eigenvector of H0 + U and w_i the ns population of atom i in psi.
ForceEvaluation bo_force(const BoundStateTracker& tracker, const Geometry& geometry, double alpha,
                         const Vec3& direction, const BoundState* hint = nullptr);
ForceEvaluation bo_force(const PhysicalConfig& config, const Geometry& geometry, double alpha,
                         const Vec3& direction);

struct Trajectory {
  std::vector<double> times;                  // us
  std::vector<std::array<Vec3, 2>> positions;  // um
  std::vector<std::array<Vec3, 2>> momenta;    // m * um/us in units of hbar (p / hbar, 1/um)
  std::vector<double> energy;             // K + <psi|H0 + U|psi>, rad/us
  std::vector<double> mechanical_energy;  // K + <psi|H0|psi>, rad/us
  std::vector<double> applied_energy;     // <psi|U|psi>, rad/us
  std::vector<double> applied_power;      // sum_i F_applied,i . v_i, rad/us^2
  std::vector<double> separation;         // um
  std::vector<Vec3> com;                  // um
  bool ruptured = false;
  double rupture_time = 0.0;
  double min_step_overlap = 1.0;

  std::size_t size() const { return times.size(); }
};

struct InitialState {
  std::array<Vec3, 2> positions;
  std::array<Vec3, 2> momenta{Vec3::Zero(), Vec3::Zero()};
};

/// Rest at (0, 0, -+r_p/2) rotated by `axis_angle` about y.
InitialState equilibrium_start(const WellDescriptor& well, double axis_angle = 0.0);
double default_time_step(const WellDescriptor& well);

/// Velocity-Verlet integration. Stops early with `ruptured` set when the
/// separation exceeds rupture_factor * r_p. Throws IntegratorError when the
/// energy drifts by more than 1% at alpha = 0.
Trajectory integrate(const BoundStateTracker& tracker, const InitialState& initial, const DragConfig& drag);
Trajectory integrate(const PhysicalConfig& config, const InitialState& initial, const DragConfig& drag);

/// Single ns atom under the same shift: constant acceleration -alpha/m along
/// the direction. Returns the displacement vector after t_final.
Vec3 free_ns_displacement(const PhysicalConfig& config, const DragConfig& drag);

struct RuptureSummary {
  double alpha = 0.0;
  double max_relative_displacement = 0.0;  // um
  bool ruptured = false;
  bool continuation_lost = false;
  double oscillation_frequency = 0.0;  // MHz (cycles per us); 0 when not oscillating
  double com_displacement = 0.0;       // um, along -direction
};

RuptureSummary summarize(const Trajectory& trajectory, double alpha, const Vec3& direction);
/// Oscillation frequency in cycles/us from zero crossings of (x - mean).
double oscillation_frequency(const std::vector<double>& times, const std::vector<double>& values);

std::vector<RuptureSummary> rupture_sweep(const BoundStateTracker& tracker, const std::vector<double>& alpha_grid,
                                          double t_final = 10.0, double axis_angle = 0.0, int threads = 0);
std::vector<RuptureSummary> rupture_sweep(const PhysicalConfig& config, const std::vector<double>& alpha_grid,
                                          double t_final = 10.0, int threads = 0);
/// Smallest ruptured alpha in a sweep.
std::optional<double> rupture_threshold(const std::vector<RuptureSummary>& sweep);

/// |<psi_alpha|psi_0>|^2 at a fixed geometry.
double adiabatic_overlap(const BoundStateTracker& tracker, const Geometry& geometry, double alpha,
                         const Vec3& direction = Vec3::UnitZ());
double adiabatic_overlap(const PhysicalConfig& config, const Geometry& geometry, double alpha,
                         const Vec3& direction = Vec3::UnitZ());

}  // namespace macrodimer
