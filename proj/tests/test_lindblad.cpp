#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "macrodimer/error.hpp"
#include "macrodimer/lindblad.hpp"
#include "macrodimer/units.hpp"

using namespace macrodimer;

namespace {

ProbeDrive bare_eit() {
  ProbeDrive d;
  d.gamma_p = units::mhz(6.0);
  d.gamma_c = units::khz(25.0);
  d.omega_p = units::mhz(1.0);
  d.omega_c = units::mhz(10.0);
  d.level_detunings = {0.0};
  d.level_couplings = {1.0};
  return d;
}

ProbeDrive two_level(double delta_p) {
  ProbeDrive d = bare_eit();
  d.delta_p = delta_p;
  d.omega_c = 0.0;
  d.level_detunings.clear();
  d.level_couplings.clear();
  return d;
}

// Two-level optical pumping with adiabatically eliminated coherences: the
// excited fraction is the saturated Lorentzian and half of its decay feeds g'.
double rate_equation(const ProbeDrive& d, double t) {
  const double w2 = d.omega_p * d.omega_p;
  const double rho_ee = 0.25 * w2 / (d.delta_p * d.delta_p + 0.25 * d.gamma_p * d.gamma_p + 0.5 * w2);
  return 1.0 - std::exp(-0.5 * d.gamma_p * rho_ee * t);
}

// Weak-probe linear response written as a continued fraction in the
// convention i Gamma_p / (Gamma_p - i Delta_p + sum Omega_c^2 F^2 / (Gamma_c - i Delta_k)).
std::complex<double> chi_formula(double gamma_p, double gamma_c, double omega_c, double delta_p,
                                 const std::vector<double>& delta_k, const std::vector<double>& f) {
  const std::complex<double> i(0, 1);
  std::complex<double> den = gamma_p - i * delta_p;
  for (std::size_t k = 0; k < f.size(); ++k)
    den += omega_c * omega_c * f[k] * f[k] / (gamma_c - i * delta_k[k]);
  return i * gamma_p / den;
}

ProbeDrive random_drive(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ProbeDrive d;
  d.gamma_p = units::mhz(1.0 + 10.0 * u(rng));
  d.gamma_c = units::khz(10.0 + 100.0 * u(rng));
  d.omega_p = units::mhz(0.2 + 3.0 * u(rng));
  d.omega_c = units::mhz(2.0 + 15.0 * u(rng));
  d.delta_p = units::mhz(4.0 * (u(rng) - 0.5));
  const int levels = 1 + static_cast<int>(4 * u(rng));
  for (int k = 0; k < levels; ++k) {
    d.level_detunings.push_back(units::mhz(40.0 * (u(rng) - 0.5)));
    d.level_couplings.push_back(1.5 * u(rng));
  }
  return d;
}

}  // namespace

TEST(Lindblad, StartsInTheGroundState) {
  const auto p = evolve_probe(bare_eit(), 0.0);
  EXPECT_DOUBLE_EQ(p.g, 1.0);
  EXPECT_DOUBLE_EQ(p.gprime, 0.0);
  EXPECT_DOUBLE_EQ(p.e, 0.0);
}

TEST(Lindblad, RejectsInvalidDrives) {
  ProbeDrive d = bare_eit();
  d.gamma_p = -1.0;
  EXPECT_THROW(evolve_probe(d, 1.0), InvalidArgument);
  d = bare_eit();
  d.level_couplings.push_back(1.0);
  EXPECT_THROW(evolve_probe(d, 1.0), InvalidArgument);
  EXPECT_THROW(evolve_probe(bare_eit(), -1.0), InvalidArgument);
}

TEST(Lindblad, TraceAndPositivityForRandomDrives) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 12; ++trial) {
    const auto d = random_drive(rng);
    for (auto method : {LindbladMethod::eigenbasis, LindbladMethod::runge_kutta}) {
      LindbladOptions o;
      o.method = method;
      const auto p = evolve_probe(d, 2.0, o);
      EXPECT_LE(p.trace_error, 1e-8);
      EXPECT_GE(p.min_eigenvalue, -1e-8);
      double sum = p.g + p.gprime + p.e;
      for (double x : p.k) sum += x;
      EXPECT_NEAR(sum, 1.0, 1e-8);
      EXPECT_GE(p.gprime, -1e-10);
    }
  }
}

TEST(Lindblad, MethodsAgree) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    const auto d = random_drive(rng);
    LindbladOptions rk;
    rk.method = LindbladMethod::runge_kutta;
    const auto a = evolve_probe(d, 2.0);
    const auto b = evolve_probe(d, 2.0, rk);
    EXPECT_NEAR(a.gprime, b.gprime, 1e-6);
    EXPECT_NEAR(a.g, b.g, 1e-6);
  }
}

TEST(Lindblad, BareEitStaysDark) {
  const auto d = bare_eit();
  for (double t : {0.5, 1.0, 2.0}) EXPECT_LT(evolve_probe(d, t).gprime, 0.05);
}

TEST(Lindblad, TwoLevelPumpingMatchesRateEquation) {
  for (double dp : {0.0, units::mhz(2.0)}) {
    const auto d = two_level(dp);
    for (double t : {2.0, 4.0, 8.0}) {
      const double expect = rate_equation(d, t);
      EXPECT_NEAR(evolve_probe(d, t).gprime, expect, 0.1 * expect) << "t = " << t;
    }
  }
}

TEST(Lindblad, PumpingSaturates) {
  EXPECT_GT(evolve_probe(two_level(0.0), 60.0).gprime, 0.99);
}

TEST(Lindblad, SteadyStateMatchesLinearResponse) {
  // With this sign and scale convention the master equation at (Delta_p, Delta_k)
  // reproduces the continued fraction at (-2 Delta_p, -2 Delta_k).
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    ProbeDrive d = bare_eit();
    d.omega_p = d.omega_c / 20.0;
    d.delta_p = units::mhz(2.0 * u(rng));
    d.level_detunings = {units::mhz(10.0 * u(rng)), units::mhz(10.0 * u(rng))};
    d.level_couplings = {std::abs(u(rng)), std::abs(u(rng))};
    std::vector<double> dk;
    for (double x : d.level_detunings) dk.push_back(-2.0 * x);
    const auto expect = chi_formula(d.gamma_p, d.gamma_c, d.omega_c, -2.0 * d.delta_p, dk, d.level_couplings);
    const auto got = steady_state_susceptibility(d);
    EXPECT_LT(std::abs(got - expect), 0.05 * std::max(std::abs(expect), 0.05)) << got << " vs " << expect;
  }
}

TEST(Lindblad, ResonantTwoLevelSusceptibilityIsI) {
  ProbeDrive d = two_level(0.0);
  d.omega_p = units::mhz(0.01);
  const auto chi = steady_state_susceptibility(d);
  EXPECT_NEAR(chi.real(), 0.0, 1e-3);
  EXPECT_NEAR(chi.imag(), 1.0, 1e-3);
}

TEST(Lindblad, PumpingRateMatchesRateEquationInWeakDrive) {
  ProbeDrive d = two_level(units::mhz(1.0));
  d.omega_p = units::mhz(0.1);
  EXPECT_NEAR(1.0 - std::exp(-pumping_rate(d) * 3.0), rate_equation(d, 3.0), 1e-3 * rate_equation(d, 3.0));
}
