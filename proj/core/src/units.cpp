#include "macrodimer/units.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "macrodimer/error.hpp"

namespace macrodimer::units {

double dipole_strength_c3(double reduced_dipole_ea0) {
  // In atomic units |D|^2/(4 pi eps0) = D^2 Hartree a0^3.
  const double hartree_rad_per_us = hartree_j / hbar * 1e-6;
  return reduced_dipole_ea0 * reduced_dipole_ea0 * hartree_rad_per_us *
         bohr_radius_um * bohr_radius_um * bohr_radius_um;
}

namespace {

enum class Dimension { energy, force };

Dimension dimension_of(Unit u) {
  switch (u) {
    case Unit::h_ghz_per_um:
    case Unit::piconewton:
      return Dimension::force;
    default:
      return Dimension::energy;
  }
}

// SI value (J or N) of one unit.
double si_scale(Unit u) {
  switch (u) {
    case Unit::h_mhz:
      return planck_h * 1e6;
    case Unit::rad_per_us:
      return hbar * 1e6;
    case Unit::millikelvin:
      return boltzmann_k * 1e-3;
    case Unit::microkelvin:
      return boltzmann_k * 1e-6;
    case Unit::h_ghz_per_um:
      return planck_h * 1e9 / 1e-6;
    case Unit::piconewton:
      return 1e-12;
  }
  return 1.0;
}

std::string normalize(std::string_view name) {
  std::string out;
  for (std::size_t i = 0; i < name.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(name[i]);
    // UTF-8 micro sign / greek mu -> 'u'; middle dot dropped.
    if (c == 0xC2 && i + 1 < name.size()) {
      const unsigned char d = static_cast<unsigned char>(name[i + 1]);
      if (d == 0xB5) out += 'u';
      ++i;
      continue;
    }
    if (c == 0xCE && i + 1 < name.size() && static_cast<unsigned char>(name[i + 1]) == 0xBC) {
      out += 'u';
      ++i;
      continue;
    }
    if (c == '*' || c == ' ' || c == '.' || c == '_') continue;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

}  // namespace

std::vector<Unit> supported_units() {
  return {Unit::h_mhz, Unit::h_ghz_per_um, Unit::piconewton,
          Unit::millikelvin, Unit::microkelvin, Unit::rad_per_us};
}

std::string unit_name(Unit u) {
  switch (u) {
    case Unit::h_mhz: return "hMHz";
    case Unit::h_ghz_per_um: return "hGHz/um";
    case Unit::piconewton: return "pN";
    case Unit::millikelvin: return "mK";
    case Unit::microkelvin: return "uK";
    case Unit::rad_per_us: return "rad/us";
  }
  return "?";
}

Unit parse_unit(std::string_view name) {
  const std::string n = normalize(name);
  if (n == "hmhz") return Unit::h_mhz;
  if (n == "hghz/um") return Unit::h_ghz_per_um;
  if (n == "pn") return Unit::piconewton;
  if (n == "mk") return Unit::millikelvin;
  if (n == "uk") return Unit::microkelvin;
  if (n == "rad/us") return Unit::rad_per_us;
  std::ostringstream msg;
  msg << "unknown unit '" << name << "'; supported:";
  for (Unit u : supported_units()) msg << ' ' << unit_name(u);
  throw InvalidArgument(msg.str());
}

double convert(double value, Unit from, Unit to) {
  if (dimension_of(from) != dimension_of(to)) {
    throw InvalidArgument("unsupported conversion " + unit_name(from) + " -> " + unit_name(to) +
                          "; supported pairs: any two of {hMHz, rad/us, mK, uK} or "
                          "{hGHz/um, pN}");
  }
  if (from == to) return value;
  return value * (si_scale(from) / si_scale(to));
}

double convert(double value, std::string_view from, std::string_view to) {
  return convert(value, parse_unit(from), parse_unit(to));
}

}  // namespace macrodimer::units
