#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "macrodimer/angular.hpp"
#include "macrodimer/units.hpp"

namespace macrodimer {

/// Physical parameters in internal units (um, us, rad/us, m/hbar).
///
/// The fine-structure splitting `delta` is E(np1/2) - E(np3/2); rubidium has
/// np1/2 below np3/2, hence the negative default.
struct PhysicalConfig {
  int n = 40;
  double mass = units::mass_over_hbar(units::rb85_mass_amu * units::atomic_mass_unit);
  double delta = -units::ghz(1.0);
  // ns <-> np3/2 spacing; only documents why the excitation-changing blocks
  // of the dipole-dipole operator are dropped.
  double omega0 = units::ghz(63.0);
  ReducedDipole reduced_dipole = ReducedDipole::for_principal(40);
  // Calibrated r0 in um. When empty, r0 follows from the reduced dipole.
  std::optional<double> r0_calibrated = 1.0;

  double gamma_p = units::mhz(6.0);
  double gamma_c = units::khz(25.0);
  double omega_p = units::mhz(1.0);
  double omega_c = units::mhz(10.0);
  double delta_p = 0.0;
  double delta_c = 0.0;
  double c6 = units::ghz(1.0);  // rad/us * um^6

  /// r0 = [|D|^2/(4 pi eps0 hbar |Delta|)]^(1/3) from the reduced dipole.
  double r0_derived() const;
  /// Calibrated r0 if set, otherwise the derived one.
  double r0() const;
  /// C3 = hbar|Delta| r0^3 so that Omega(R) = |Delta| (r0/R)^3.
  double c3() const { return std::abs(delta) * r0() * r0() * r0(); }
  double reduced_mass() const { return 0.5 * mass; }

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;
};

struct CharacteristicScales {
  double r0 = 0.0;          // um
  double r0_derived = 0.0;  // um, from the reduced dipole alone
  double c3 = 0.0;          // rad/us * um^3

  /// Omega(R) = |D|^2/(4 pi eps0 hbar R^3) in rad/us.
  double omega_of_r(double r) const { return c3 / (r * r * r); }
};

CharacteristicScales characteristic_scales(const PhysicalConfig& config);

/// Parses the "physics" object of a configuration file (JSON text). Every
/// documented key must be present; unknown keys are errors.
///
///   n                  principal quantum number
///   mass_amu           atomic mass in u
///   delta_mhz          E(np1/2) - E(np3/2) in MHz (angular 2pi x value)
///   omega0_ghz         ns <-> np3/2 spacing in GHz
///   radial_element_a0  <np|r|ns> in a0, or null for n^2
///   r0_um              calibrated r0 in um, or null to derive it
///   gamma_p_mhz, gamma_c_khz, omega_p_mhz, omega_c_mhz, delta_p_mhz,
///   delta_c_mhz        EIT rates and detunings
///   c6_ghz_um6         probe-probe van der Waals coefficient
PhysicalConfig physical_config_from_json(std::string_view json_text);

/// Serializes to the same schema (stable key order, used for hashing).
std::string physical_config_to_json(const PhysicalConfig& config);

}  // namespace macrodimer
