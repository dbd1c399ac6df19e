#include "macrodimer/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "macrodimer/error.hpp"
#include "macrodimer/parallel.hpp"

namespace macrodimer {

void DragConfig::validate() const {
  if (!std::isfinite(alpha)) throw InvalidArgument("alpha must be finite");
  if (!(direction.norm() > 0)) throw InvalidArgument("drag direction must be non-zero");
  if (!(t_final >= 0)) throw InvalidArgument("t_final must be >= 0");
  if (!(dt >= 0)) throw InvalidArgument("dt must be > 0 (or 0 for the default)");
  if (!(rupture_factor > 1)) throw InvalidArgument("rupture factor must exceed 1");
}

void DressingProfile::validate() const {
  if (detuning_d == 0.0) throw InvalidArgument("dressing detuning must be non-zero");
  if (!(rabi_max >= 0)) throw InvalidArgument("dressing Rabi frequency must be >= 0");
  if (!(ramp_length > 0)) throw InvalidArgument("ramp length must be positive");
  if (!(std::abs(detuning_d) > rabi_max))
    throw InvalidArgument("dressing must be perturbative: |detuning| > Rabi frequency");
}

double DressingProfile::shift(double z) const {
  const double rabi = rabi_max * std::clamp(z / ramp_length, 0.0, 1.0);
  return rabi * rabi / (4.0 * detuning_d);
}

DressingForce dressing_force_profile(const DressingProfile& profile) {
  profile.validate();
  const double ratio = profile.rabi_max / (2.0 * profile.detuning_d);
  return {profile.shift(profile.ramp_length) / profile.ramp_length, ratio * ratio};
}

ForceEvaluation bo_force(const BoundStateTracker& tracker, const Geometry& geometry, double alpha,
                         const Vec3& direction, const BoundState* hint) {
  const InteractionModel& model = tracker.model();
  const Vec3 dir = direction.normalized();
  const AppliedField field{alpha, dir};
  ForceEvaluation out;
  out.state = tracker.solve(geometry, hint, &field);
  const auto grad = model.dipole_dipole_gradient(geometry, out.state.psi);
  for (int i = 0; i < 2; ++i) {
    const double w = model.ns_population(out.state.psi, i);
    out.ns_weight[static_cast<std::size_t>(i)] = w;
    out.forces[static_cast<std::size_t>(i)] = -grad[static_cast<std::size_t>(i)] - alpha * w * dir;
    out.applied_energy += alpha * w * dir.dot(geometry.positions[static_cast<std::size_t>(i)]);
  }
  out.energy = out.state.energy - out.applied_energy;
  return out;
}

ForceEvaluation bo_force(const PhysicalConfig& config, const Geometry& geometry, double alpha,
                         const Vec3& direction) {
  return bo_force(BoundStateTracker(config), geometry, alpha, direction);
}

InitialState equilibrium_start(const WellDescriptor& well, double axis_angle) {
  const Vec3 axis(std::sin(axis_angle), 0.0, std::cos(axis_angle));
  const Geometry g = Geometry::pair_on_axis(well.r_p, axis);
  return InitialState{{g.positions[0], g.positions[1]}};
}

double default_time_step(const WellDescriptor& well) { return (units::two_pi / well.omega_vib) / 200.0; }

Trajectory integrate(const BoundStateTracker& tracker, const InitialState& initial, const DragConfig& drag) {
  drag.validate();
  const double m = tracker.model().config().mass;
  const double dt = drag.dt > 0 ? drag.dt : default_time_step(tracker.well());
  const int steps = static_cast<int>(std::ceil(drag.t_final / dt - 1e-9));
  const double h = steps > 0 ? drag.t_final / steps : 0.0;
  const Vec3 dir = drag.direction.normalized();
  const double rupture_radius = drag.rupture_factor * tracker.well().r_p;

  std::array<Vec3, 2> r = initial.positions;
  std::array<Vec3, 2> p = initial.momenta;
  ForceEvaluation f = bo_force(tracker, Geometry{{r[0], r[1]}}, drag.alpha, dir);

  Trajectory traj;
  auto record = [&](double t) {
    double kinetic = 0.0;
    double power = 0.0;
    for (int i = 0; i < 2; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      kinetic += p[ui].squaredNorm() / (2.0 * m);
      power += -drag.alpha * f.ns_weight[ui] * dir.dot(p[ui] / m);
    }
    traj.times.push_back(t);
    traj.positions.push_back(r);
    traj.momenta.push_back(p);
    traj.energy.push_back(kinetic + f.energy + f.applied_energy);
    traj.mechanical_energy.push_back(kinetic + f.energy);
    traj.applied_energy.push_back(f.applied_energy);
    traj.applied_power.push_back(power);
    traj.separation.push_back((r[1] - r[0]).norm());
    traj.com.push_back(0.5 * (r[0] + r[1]));
  };
  record(0.0);
  const double e_start = traj.energy.front();
  const double depth = tracker.well().depth;

  for (int s = 1; s <= steps; ++s) {
    for (int i = 0; i < 2; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      p[ui] += 0.5 * h * f.forces[ui];
      r[ui] += h * p[ui] / m;
    }
    BoundState previous = std::move(f.state);
    f = bo_force(tracker, Geometry{{r[0], r[1]}}, drag.alpha, dir, &previous);
    const double ov = std::norm(previous.psi.dot(f.state.psi));
    traj.min_step_overlap = std::min(traj.min_step_overlap, ov);
    for (int i = 0; i < 2; ++i) p[static_cast<std::size_t>(i)] += 0.5 * h * f.forces[static_cast<std::size_t>(i)];
    record(s * h);
    if (drag.alpha == 0.0 && std::abs(traj.energy.back() - e_start) > 0.01 * depth) {
      std::ostringstream msg;
      msg << "energy drift of " << std::abs(traj.energy.back() - e_start) / depth
          << " of the well depth at t = " << s * h << " us; reduce dt below " << h << " us";
      throw IntegratorError(msg.str());
    }
    if (traj.separation.back() > rupture_radius) {
      traj.ruptured = true;
      traj.rupture_time = s * h;
      break;
    }
  }
  return traj;
}

Trajectory integrate(const PhysicalConfig& config, const InitialState& initial, const DragConfig& drag) {
  return integrate(BoundStateTracker(config), initial, drag);
}

Vec3 free_ns_displacement(const PhysicalConfig& config, const DragConfig& drag) {
  drag.validate();
  const double a = drag.alpha / config.mass;
  return -0.5 * a * drag.t_final * drag.t_final * drag.direction.normalized();
}

double oscillation_frequency(const std::vector<double>& times, const std::vector<double>& values) {
  if (values.size() < 3) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  std::vector<double> crossings;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double a = values[i - 1] - mean, b = values[i] - mean;
    if ((a < 0 && b >= 0) || (a >= 0 && b < 0)) {
      const double frac = a / (a - b);
      crossings.push_back(times[i - 1] + frac * (times[i] - times[i - 1]));
    }
  }
  if (crossings.size() < 3) return 0.0;
  const double span = crossings.back() - crossings.front();
  return span > 0 ? 0.5 * static_cast<double>(crossings.size() - 1) / span : 0.0;
}

RuptureSummary summarize(const Trajectory& trajectory, double alpha, const Vec3& direction) {
  RuptureSummary s;
  s.alpha = alpha;
  s.ruptured = trajectory.ruptured;
  const double r_start = trajectory.separation.front();
  for (double r : trajectory.separation)
    s.max_relative_displacement = std::max(s.max_relative_displacement, std::abs(r - r_start));
  if (!s.ruptured) s.oscillation_frequency = oscillation_frequency(trajectory.times, trajectory.separation);
  s.com_displacement = -(trajectory.com.back() - trajectory.com.front()).dot(direction.normalized());
  return s;
}

std::vector<RuptureSummary> rupture_sweep(const BoundStateTracker& tracker, const std::vector<double>& alpha_grid,
                                          double t_final, double axis_angle, int threads) {
  for (std::size_t i = 1; i < alpha_grid.size(); ++i)
    if (!(alpha_grid[i] > alpha_grid[i - 1])) throw InvalidArgument("alpha grid must be ascending");
  std::vector<RuptureSummary> out(alpha_grid.size());
  const InitialState start = equilibrium_start(tracker.well(), axis_angle);
  parallel_for(alpha_grid.size(), threads, [&](std::size_t i) {
    DragConfig drag;
    drag.alpha = alpha_grid[i];
    drag.t_final = t_final;
    try {
      out[i] = summarize(integrate(tracker, start, drag), drag.alpha, drag.direction);
    } catch (const ContinuationLost&) {
      out[i].alpha = alpha_grid[i];
      out[i].ruptured = true;
      out[i].continuation_lost = true;
    }
  });
  return out;
}

std::vector<RuptureSummary> rupture_sweep(const PhysicalConfig& config, const std::vector<double>& alpha_grid,
                                          double t_final, int threads) {
  return rupture_sweep(BoundStateTracker(config, threads), alpha_grid, t_final, 0.0, threads);
}

std::optional<double> rupture_threshold(const std::vector<RuptureSummary>& sweep) {
  for (const auto& s : sweep)
    if (s.ruptured) return s.alpha;
  return std::nullopt;
}

double adiabatic_overlap(const BoundStateTracker& tracker, const Geometry& geometry, double alpha,
                         const Vec3& direction) {
  const BoundState base = tracker.solve(geometry);
  if (alpha == 0.0) return 1.0;
  const BoundState dressed = tracker.solve_with_field(base, AppliedField{alpha, direction});
  return std::norm(dressed.psi.dot(base.psi));
}

double adiabatic_overlap(const PhysicalConfig& config, const Geometry& geometry, double alpha,
                         const Vec3& direction) {
  return adiabatic_overlap(BoundStateTracker(config), geometry, alpha, direction);
}

}  // namespace macrodimer
