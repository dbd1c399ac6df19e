#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "macrodimer/eit.hpp"
#include "macrodimer/error.hpp"
#include "macrodimer/units.hpp"

using namespace macrodimer;

namespace {

const PhysicalConfig& config() {
  static const PhysicalConfig c;
  return c;
}

const BoundStateTracker& tracker() {
  static const BoundStateTracker t(config());
  return t;
}

const MoleculeProbe& probe() {
  static const MoleculeProbe p(config(), tracker().reference());
  return p;
}

double im_chi_at(double z, double rho) {
  return susceptibility(config(), probe().spectrum(Vec3(rho, 0.0, z))).imag();
}

// Single dressed level at detuning d with the full weight of both probe spins.
ProbeSpectrum single_level(double shift) {
  ProbeSpectrum s;
  ProbeLevel l;
  l.shift = shift;
  l.weight = 2.0;
  l.weight_jz = {1.0, 1.0};
  s.levels.push_back(l);
  return s;
}

}  // namespace

TEST(Spectrum, FarProbeIsUnshifted) {
  const auto s = probe().spectrum(Vec3(0.0, 0.0, 20.0));
  EXPECT_NEAR(s.total_weight(), 2.0, 1e-6);
  double weighted = 0.0;
  for (const auto& l : s.levels) weighted += l.weight * std::abs(l.shift);
  EXPECT_LT(weighted / s.total_weight(), units::khz(1.0));
}

TEST(Spectrum, WeightSumIsTwoEverywhere) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int k = 0; k < 25; ++k) {
    const Vec3 p(std::abs(u(rng)) + 0.8, 0.0, u(rng));
    const auto s = probe().spectrum(p);
    EXPECT_NEAR(s.total_weight(), 2.0, 1e-9);
    for (const auto& l : s.levels) {
      EXPECT_GE(l.weight, 0.0);
      EXPECT_NEAR(l.weight_jz[0] + l.weight_jz[1], l.weight, 1e-12);
    }
  }
}

TEST(Spectrum, NearProbeIsStronglyShifted) {
  const auto s = probe().spectrum(Vec3(1.0, 0.0, 0.0));
  double weighted = 0.0;
  for (const auto& l : s.levels) weighted += l.weight * std::abs(l.shift);
  EXPECT_GT(weighted / s.total_weight(), units::mhz(10.0));
}

TEST(Spectrum, ThreeAtomHelperMatchesClass) {
  const Vec3 p(1.3, 0.0, 0.7);
  const auto a = probe().spectrum(p);
  const auto b = three_atom_spectrum(config(), tracker().reference().geometry, p);
  ASSERT_EQ(a.levels.size(), b.levels.size());
  for (std::size_t k = 0; k < a.levels.size(); ++k) {
    EXPECT_NEAR(a.levels[k].shift, b.levels[k].shift, 1e-6);
    EXPECT_NEAR(a.levels[k].weight, b.levels[k].weight, 1e-6);
  }
}

TEST(Spectrum, NpImpurityConservesWeight) {
  for (const auto& st : single_atom_states()) {
    if (st.level == Level::nS) continue;
    const auto s = single_impurity_spectrum(config(), st, Vec3(0.7, 0.0, 1.4));
    EXPECT_NEAR(s.total_weight(), 2.0, 1e-9);
  }
}

TEST(Spectrum, NsImpurityVanDerWaalsShift) {
  const SingleAtomState ns{Level::nS, HalfInt{1}};
  const double r = 2.5;
  const auto s = single_impurity_spectrum(config(), ns, Vec3(0.0, 0.0, r));
  ASSERT_EQ(s.levels.size(), 1u);
  EXPECT_NEAR(s.levels[0].shift, -config().c6 / std::pow(r, 6), 1e-12);
  EXPECT_NEAR(s.total_weight(), 2.0, 1e-12);
}

TEST(Susceptibility, Limits) {
  const auto& c = config();
  // Unshifted level: transparency up to the Rydberg width.
  const double dark = susceptibility(c, single_level(0.0)).imag();
  EXPECT_LT(dark, 0.01);
  // Far-detuned level: the bare two-level absorption.
  EXPECT_NEAR(susceptibility(c, single_level(units::ghz(10.0))).imag(), 1.0, 1e-3);
  PhysicalConfig off = c;
  off.omega_c = 1e-9;
  EXPECT_NEAR(susceptibility(off, single_level(0.0)).imag(), 1.0, 1e-6);
}

TEST(Susceptibility, ClosedFormSingleLevel) {
  const auto& c = config();
  const std::complex<double> i(0, 1);
  for (double d : {-units::mhz(3.0), units::mhz(0.5), units::mhz(7.0)}) {
    const auto expect = i * c.gamma_p / (c.gamma_p - i * c.delta_p + 2.0 * c.omega_c * c.omega_c / (c.gamma_c - i * d));
    EXPECT_LT(std::abs(susceptibility(c, single_level(d)) - expect), 1e-12);
  }
}

TEST(Susceptibility, BoundedOnResonance) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int k = 0; k < 40; ++k) {
    const double im = im_chi_at(u(rng), std::abs(u(rng)) + 0.5);
    EXPECT_GE(im, -1e-12);
    EXPECT_LE(im, 1.0 + 1e-12);
  }
}

TEST(Susceptibility, MirrorSymmetricAboutTheMolecule) {
  for (double z : {0.6, 1.5, 3.0})
    for (double rho : {0.5, 1.2, 2.5}) {
      EXPECT_NEAR(im_chi_at(z, rho), im_chi_at(-z, rho), 1e-8);
      EXPECT_NEAR(im_chi_at(z, rho), im_chi_at(z, -rho), 1e-8);
    }
}

TEST(Susceptibility, OpaqueNearTransparentFar) {
  EXPECT_LT(im_chi_at(10.0, 10.0), 0.01);
  EXPECT_GT(im_chi_at(0.0, 1.0), 0.9);
}

TEST(Population, PumpedNearTheMolecule) {
  const auto near = probe().spectrum(Vec3(1.0, 0.0, 0.0));
  const auto a = probe_master_equation(config(), near, 2.0);
  const auto b = probe_master_equation(config(), near, 4.0);
  EXPECT_GT(a.pop_gprime, 0.5);
  EXPECT_GE(b.pop_gprime, a.pop_gprime);
  EXPECT_LE(a.trace_error, 1e-8);
  EXPECT_GE(a.min_eigenvalue, -1e-8);
}

TEST(Population, DarkFarFromTheMolecule) {
  const auto far = probe().spectrum(Vec3(10.0, 0.0, 10.0));
  EXPECT_LT(probe_master_equation(config(), far, 2.0).pop_gprime, 0.05);
}

TEST(Population, DressedLevelsMergeDegeneracies) {
  const auto s = probe().spectrum(Vec3(1.5, 0.0, 0.5));
  const auto levels = dressed_levels(s);
  double w = 0.0;
  for (const auto& l : levels) w += l.weight_jz[0] + l.weight_jz[1];
  EXPECT_NEAR(w, 2.0, 0.05);
  for (std::size_t i = 1; i < levels.size(); ++i) EXPECT_GT(std::abs(levels[i].shift - levels[i - 1].shift), 0.0);
}

TEST(Maps, SmallGridShapesAndSymmetry) {
  const auto z = cell_centred_grid(-4.0, 4.0, 6);
  const auto rho = cell_centred_grid(0.0, 4.0, 3);
  ASSERT_EQ(z.size(), 6u);
  EXPECT_NEAR(z.front(), -4.0 + 4.0 / 6.0, 1e-12);
  const auto f = chi_map(probe(), z, rho, 2);
  ASSERT_EQ(f.chi.rows(), 6);
  ASSERT_EQ(f.chi.cols(), 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(f.chi(i, j).imag(), f.chi(5 - i, j).imag(), 1e-8);
}

TEST(Maps, ThreadCountDoesNotChangeResults) {
  const auto z = cell_centred_grid(-3.0, 3.0, 4);
  const auto rho = cell_centred_grid(0.0, 3.0, 2);
  const auto a = population_map(probe(), z, rho, 2.0, 1);
  const auto b = population_map(probe(), z, rho, 2.0, 3);
  EXPECT_EQ((a.p_gprime - b.p_gprime).cwiseAbs().maxCoeff(), 0.0);
}
