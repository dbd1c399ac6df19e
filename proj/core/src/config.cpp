#include "macrodimer/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

#include <nlohmann/json.hpp>
#include "macrodimer/error.hpp"

namespace macrodimer {

double PhysicalConfig::r0_derived() const {
  const double c3_physical = units::dipole_strength_c3(reduced_dipole.d());
  return std::cbrt(c3_physical / std::abs(delta));
}

double PhysicalConfig::r0() const { return r0_calibrated ? *r0_calibrated : r0_derived(); }

void PhysicalConfig::validate() const {
  if (!(mass > 0.0)) throw InvalidArgument("mass must be positive");
  if (delta == 0.0 || !std::isfinite(delta)) throw InvalidArgument("fine-structure splitting must be nonzero");
  if (!(gamma_p > 0.0)) throw InvalidArgument("gamma_p must be positive");
  if (!(gamma_c > 0.0)) throw InvalidArgument("gamma_c must be positive");
  if (!(omega_c > 0.0)) throw InvalidArgument("omega_c must be positive");
  if (omega_p < 0.0) throw InvalidArgument("omega_p must be non-negative");
  if (!(reduced_dipole.radial_element > 0.0)) throw InvalidArgument("radial element must be positive");
  if (r0_calibrated && !(*r0_calibrated > 0.0)) throw InvalidArgument("r0 must be positive");
  if (c6 < 0.0) throw InvalidArgument("c6 must be non-negative");
}

CharacteristicScales characteristic_scales(const PhysicalConfig& config) {
  config.validate();
  return CharacteristicScales{config.r0(), config.r0_derived(), config.c3()};
}

namespace {

using nlohmann::json;

const std::set<std::string>& physics_keys() {
  static const std::set<std::string> keys = {
      "n",           "mass_amu",    "delta_mhz",   "omega0_ghz",  "radial_element_a0",
      "r0_um",       "gamma_p_mhz", "gamma_c_khz", "omega_p_mhz", "omega_c_mhz",
      "delta_p_mhz", "delta_c_mhz", "c6_ghz_um6"};
  return keys;
}

double number(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError("physics." + key + ": expected a number");
  return v.get<double>();
}

// Twelve significant digits absorb the unit-conversion roundoff, so a saved
// file reloads and saves to the same text.
double tidy(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

}  // namespace

PhysicalConfig physical_config_from_json(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("physics: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("physics: expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!physics_keys().contains(key)) throw ConfigError("physics: unknown key '" + key + "'");
  }
  for (const auto& key : physics_keys()) {
    if (!j.contains(key)) throw ConfigError("physics: missing key '" + key + "'");
  }

  PhysicalConfig c;
  if (!j.at("n").is_number_integer()) throw ConfigError("physics.n: expected an integer");
  c.n = j.at("n").get<int>();
  c.mass = units::mass_over_hbar(number(j, "mass_amu") * units::atomic_mass_unit);
  c.delta = units::mhz(number(j, "delta_mhz"));
  c.omega0 = units::ghz(number(j, "omega0_ghz"));
  c.reduced_dipole = j.at("radial_element_a0").is_null()
                         ? ReducedDipole::for_principal(c.n)
                         : ReducedDipole{number(j, "radial_element_a0")};
  if (j.at("r0_um").is_null()) {
    c.r0_calibrated.reset();
  } else {
    c.r0_calibrated = number(j, "r0_um");
  }
  c.gamma_p = units::mhz(number(j, "gamma_p_mhz"));
  c.gamma_c = units::khz(number(j, "gamma_c_khz"));
  c.omega_p = units::mhz(number(j, "omega_p_mhz"));
  c.omega_c = units::mhz(number(j, "omega_c_mhz"));
  c.delta_p = units::mhz(number(j, "delta_p_mhz"));
  c.delta_c = units::mhz(number(j, "delta_c_mhz"));
  c.c6 = units::ghz(number(j, "c6_ghz_um6"));
  c.validate();
  return c;
}

std::string physical_config_to_json(const PhysicalConfig& c) {
  json j;
  j["n"] = c.n;
  j["mass_amu"] = tidy(c.mass / units::mass_over_hbar(units::atomic_mass_unit));
  j["delta_mhz"] = tidy(units::to_mhz(c.delta));
  j["omega0_ghz"] = tidy(units::to_mhz(c.omega0) * 1e-3);
  j["radial_element_a0"] = c.reduced_dipole.radial_element;
  j["r0_um"] = c.r0_calibrated ? json(*c.r0_calibrated) : json(nullptr);
  j["gamma_p_mhz"] = tidy(units::to_mhz(c.gamma_p));
  j["gamma_c_khz"] = tidy(units::to_mhz(c.gamma_c) * 1e3);
  j["omega_p_mhz"] = tidy(units::to_mhz(c.omega_p));
  j["omega_c_mhz"] = tidy(units::to_mhz(c.omega_c));
  j["delta_p_mhz"] = tidy(units::to_mhz(c.delta_p));
  j["delta_c_mhz"] = tidy(units::to_mhz(c.delta_c));
  j["c6_ghz_um6"] = tidy(units::to_mhz(c.c6) * 1e-3);
  return j.dump(2);
}

}  // namespace macrodimer
