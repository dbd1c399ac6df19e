#pragma once

// Internal unit system: lengths in um, times in us, energies expressed as
// angular frequencies in rad/us (hbar = 1), masses as m/hbar in us/um^2.
//
// "2pi x 1 MHz" is therefore 2*pi rad/us, and a force slope quoted as
// h*GHz/um is 2*pi*1000 rad/us per um.

#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace macrodimer::units {

// CODATA 2018 (exact where SI defines them).
inline constexpr double planck_h = 6.62607015e-34;          // J s
inline constexpr double hbar = planck_h / (2.0 * std::numbers::pi);
inline constexpr double boltzmann_k = 1.380649e-23;         // J/K
inline constexpr double elementary_charge = 1.602176634e-19;
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double bohr_radius_m = 5.29177210903e-11;
inline constexpr double bohr_radius_um = bohr_radius_m * 1e6;
inline constexpr double hartree_j = 4.3597447222071e-18;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Rubidium-85 atomic mass in u.
inline constexpr double rb85_mass_amu = 84.911789738;

/// 2pi x f[MHz] -> rad/us.
constexpr double mhz(double f) { return two_pi * f; }
/// 2pi x f[GHz] -> rad/us.
constexpr double ghz(double f) { return two_pi * 1e3 * f; }
/// 2pi x f[kHz] -> rad/us.
constexpr double khz(double f) { return two_pi * 1e-3 * f; }
/// rad/us -> f[MHz] (ordinary frequency).
constexpr double to_mhz(double omega) { return omega / two_pi; }

/// Slope quoted in h*GHz/um -> rad/us per um.
constexpr double ghz_per_um(double slope) { return ghz(slope); }
constexpr double to_ghz_per_um(double alpha) { return alpha / (two_pi * 1e3); }

/// Mass in kg -> m/hbar in us/um^2.
constexpr double mass_over_hbar(double mass_kg) {
  // kg / (J s) = s/m^2 ; 1 s/m^2 = 1e6 us / 1e12 um^2.
  return mass_kg / hbar * 1e-6;
}

/// |D|^2/(4 pi eps0) for D in e*a0, returned in rad/us * um^3.
double dipole_strength_c3(double reduced_dipole_ea0);

enum class Unit { h_mhz, h_ghz_per_um, piconewton, millikelvin, microkelvin, rad_per_us };

/// Parses names such as "hMHz", "h*GHz/um", "pN", "mK", "uK", "rad/us".
Unit parse_unit(std::string_view name);
std::string unit_name(Unit u);
std::vector<Unit> supported_units();

/// Converts between units of the same dimension. Throws InvalidArgument for
/// mixed dimensions and lists the supported pairs.
double convert(double value, Unit from, Unit to);
double convert(double value, std::string_view from, std::string_view to);

}  // namespace macrodimer::units
