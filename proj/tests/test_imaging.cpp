#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "macrodimer/error.hpp"
#include "macrodimer/imaging.hpp"
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

// Built once per binary; this is the slow part of the suite.
const ImagingTables& tables() {
  static const ImagingTables t = ImagingTables::build(config(), tracker(), 2.0);
  return t;
}

DragConfig reference_drag() {
  DragConfig d;
  d.alpha = units::ghz_per_um(0.08);
  return d;
}

Scene single(ImpurityKind kind, double rho = 1.0, std::uint64_t seed = 1) {
  Scene s;
  s.region = {-20.0, 20.0, -20.0, 20.0};
  s.rho_2d = rho;
  s.seed = seed;
  s.impurities.push_back({kind, Vec2::Zero(), 0.0});
  return s;
}

// rho * integral of the tabulated probability over the plane, midpoint rule.
double expected_count(const GprimeTable& t, double rho) {
  const double h = 0.02;
  const int n = static_cast<int>(t.extent() / h) + 2;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sum += t((i + 0.5) * h, (j + 0.5) * h);
  return 4.0 * sum * h * h * rho;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

TEST(Sampling, PoissonCountStatistics) {
  const Region r{0.0, 30.0, 0.0, 30.0};
  std::vector<double> counts;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto pts = sample_probe_atoms(r, 1.0, seed);
    for (const auto& p : pts) ASSERT_TRUE(r.contains(p));
    counts.push_back(static_cast<double>(pts.size()));
  }
  const double sigma = std::sqrt(900.0 / 100.0);
  EXPECT_NEAR(mean(counts), 900.0, 3.0 * sigma);
  double var = 0.0;
  for (double c : counts) var += (c - mean(counts)) * (c - mean(counts));
  var /= 99.0;
  EXPECT_NEAR(var / 900.0, 1.0, 0.45);
}

TEST(Sampling, UniformOverTheRegion) {
  const Region r{-10.0, 30.0, 5.0, 15.0};
  double mx = 0.0, mz = 0.0;
  std::size_t n = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (const auto& p : sample_probe_atoms(r, 2.0, seed)) {
      mx += p.x();
      mz += p.y();
      ++n;
    }
  EXPECT_NEAR(mx / static_cast<double>(n), 10.0, 0.3);
  EXPECT_NEAR(mz / static_cast<double>(n), 10.0, 0.1);
}

TEST(Sampling, DeterministicPerSeed) {
  const Region r{0.0, 10.0, 0.0, 10.0};
  const auto a = sample_probe_atoms(r, 1.0, 77), b = sample_probe_atoms(r, 1.0, 77);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_NE(sample_probe_atoms(r, 1.0, 78).size() + 1, 0u);
  EXPECT_THROW(sample_probe_atoms(r, 0.0, 1), InvalidArgument);
}

TEST(Tables, ShapeAndRange) {
  const auto& t = tables();
  EXPECT_NEAR(t.r_p, tracker().well().r_p, 1e-12);
  for (auto kind : {ImpurityKind::molecule, ImpurityKind::ns_atom, ImpurityKind::np_atom}) {
    const auto& v = t.table(kind).values();
    EXPECT_GE(v.minCoeff(), 0.0);
    EXPECT_LE(v.maxCoeff(), 1.0);
    EXPECT_EQ(t.table(kind)(t.table(kind).extent() + 1.0, 0.0), 0.0);
  }
  EXPECT_GT(t.molecule(0.0, 1.0), 0.3);
  EXPECT_LT(t.molecule(0.0, 7.0), 0.05);
  EXPECT_GE(t.np_atom.extent(), t.molecule.extent());
}

TEST(Tables, BilinearInterpolation) {
  Eigen::MatrixXd v(2, 2);
  v << 0.0, 1.0, 2.0, 3.0;
  const GprimeTable t(0.5, v);
  EXPECT_DOUBLE_EQ(t(0.25, 0.25), 1.5);
  EXPECT_DOUBLE_EQ(t(-0.5, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(t(0.0, 0.6), 0.0);
}

TEST(Frame, EmptySceneIsDark) {
  Scene s = single(ImpurityKind::molecule);
  s.impurities.clear();
  const auto f = render_frame(tables(), s);
  EXPECT_EQ(f.counts.sum(), 0);
  EXPECT_TRUE(f.gprime_atoms.empty());
  EXPECT_GT(f.probe_atoms, 1000u);
}

TEST(Frame, CountsSumToTheGprimeAtoms) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = render_frame(tables(), single(ImpurityKind::molecule, 1.0, seed));
    EXPECT_EQ(f.counts.sum(), static_cast<int>(f.gprime_atoms.size()));
    EXPECT_GE(f.counts.minCoeff(), 0);
    EXPECT_EQ(f.nx, 80);
    EXPECT_EQ(f.nz, 80);
  }
}

TEST(Frame, BitExactReproducibility) {
  Scene s = single(ImpurityKind::molecule, 1.0, 1234);
  s.impurities.push_back({ImpurityKind::np_atom, Vec2(12.0, 12.0), 0.0});
  const auto a = render_frame(tables(), s);
  const auto b = render_frame(tables(), s);
  EXPECT_EQ(a.counts, b.counts);
  ASSERT_EQ(a.gprime_atoms.size(), b.gprime_atoms.size());
  for (std::size_t i = 0; i < a.gprime_atoms.size(); ++i) EXPECT_EQ(a.gprime_atoms[i], b.gprime_atoms[i]);
  EXPECT_EQ(a.excluded_atoms, b.excluded_atoms);
}

TEST(Frame, MeanCountMatchesTheTableIntegral) {
  for (auto kind : {ImpurityKind::molecule, ImpurityKind::ns_atom, ImpurityKind::np_atom}) {
    std::vector<double> n;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
      n.push_back(static_cast<double>(render_frame(tables(), single(kind, 1.0, seed)).gprime_atoms.size()));
    const double expect = expected_count(tables().table(kind), 1.0);
    EXPECT_NEAR(mean(n), expect, 3.0 * std::sqrt(expect / 100.0) + 0.1) << impurity_name(kind);
  }
}

TEST(Frame, MoleculeGivesAboutTwentyAtoms) {
  std::vector<double> n;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    n.push_back(static_cast<double>(render_frame(tables(), single(ImpurityKind::molecule, 1.0, seed)).gprime_atoms.size()));
  EXPECT_NEAR(mean(n), 20.0, 6.0);
}

TEST(Frame, GprimeAtomsConcentrateNearTheMolecule) {
  std::size_t inside = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    for (const auto& p : render_frame(tables(), single(ImpurityKind::molecule, 1.0, seed)).gprime_atoms) {
      inside += p.norm() < 4.0;
      ++total;
    }
  EXPECT_GT(static_cast<double>(inside) / static_cast<double>(total), 0.9);
}

TEST(Frame, CountScalesLinearlyWithDensity) {
  std::vector<double> x, y;
  for (double rho : {0.5, 1.0, 2.0}) {
    std::vector<double> n;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
      n.push_back(static_cast<double>(render_frame(tables(), single(ImpurityKind::molecule, rho, seed)).gprime_atoms.size()));
    x.push_back(rho);
    y.push_back(mean(n));
  }
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  EXPECT_GT(sxy * sxy / (sxx * syy), 0.95);
}

TEST(Density, DerivedConstants) {
  const auto& c = config();
  const auto d = validate_density(c, 1.0);
  const double rc = std::pow(2.0 * units::ghz(1.0) * units::mhz(6.0) / std::pow(units::mhz(10.0), 2), 1.0 / 6.0);
  EXPECT_NEAR(d.rc_prime, rc, 1e-12);
  EXPECT_NEAR(d.snr_bound, 100.0 / (M_PI * rc * rc), 1e-9);
  EXPECT_TRUE(d.snr_ok);
  EXPECT_NEAR(d.dilute_factor, 0.09, 1e-12);
  EXPECT_TRUE(d.dilute_ok);
  EXPECT_FALSE(validate_density(c, 20.0).snr_ok);
}

TEST(Clusters, SingleLinkage) {
  const std::vector<Vec2> pts{{0, 0}, {1, 0}, {2, 0}, {10, 0}, {10.5, 0}};
  auto c = cluster_points(pts, 1.5);
  ASSERT_EQ(c.size(), 2u);
  std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  EXPECT_EQ(c[0].size(), 3u);
  EXPECT_EQ(c[1].size(), 2u);
}

TEST(Classify, ExpectedDisplacementFromDynamics) {
  const auto d = molecule_displacement(config(), reference_drag());
  const double expect = units::ghz_per_um(0.08) / (2.0 * config().mass) * 50.0;
  EXPECT_NEAR(d.norm(), expect, 1e-12 * expect);
  EXPECT_LT(d.y(), 0.0);
}

TEST(Classify, AdvanceMovesEachKindByItsOwnDistance) {
  Scene s = single(ImpurityKind::molecule);
  s.impurities.push_back({ImpurityKind::ns_atom, Vec2(5, 15), 0.0});
  s.impurities.push_back({ImpurityKind::np_atom, Vec2(-5, 0), 0.0});
  const auto after = advance_scene(s, reference_drag(), config());
  const Vec2 d = molecule_displacement(config(), reference_drag());
  EXPECT_LT((after.impurities[0].position - d).norm(), 1e-12);
  EXPECT_LT((after.impurities[1].position - Vec2(5, 15) - 2 * d).norm(), 1e-12);
  EXPECT_LT((after.impurities[2].position - Vec2(-5, 0)).norm(), 1e-12);
  EXPECT_NE(after.seed, s.seed);
  EXPECT_EQ(after.seed, second_frame_seed(s.seed));
}

TEST(Classify, SyntheticSceneLabelsEachKind) {
  Scene s;
  s.region = {-40, 40, -20, 25};
  s.seed = 3;
  s.impurities = {{ImpurityKind::molecule, Vec2(-25, 10), 0.0},
                  {ImpurityKind::ns_atom, Vec2(0, 15), 0.0},
                  {ImpurityKind::np_atom, Vec2(25, 0), 0.0}};
  const auto before = render_frame(tables(), s);
  const auto after = render_frame(tables(), advance_scene(s, reference_drag(), config()));
  const auto spots = classify_spots(before, after, reference_drag(), config());
  auto label_near = [&](const Vec2& p) {
    for (const auto& c : spots.clusters)
      if ((c.centroid_before - p).norm() < 3.0) return c.label;
    return SpotLabel::unresolved;
  };
  EXPECT_EQ(label_near(Vec2(-25, 10)), SpotLabel::molecule);
  EXPECT_EQ(label_near(Vec2(0, 15)), SpotLabel::ns_atom);
  EXPECT_EQ(label_near(Vec2(25, 0)), SpotLabel::np_atom);
}

TEST(Classify, AccuracyOverRandomScenes) {
  const ClassifyOptions opt;
  const DragConfig drag = reference_drag();
  const Vec2 d = molecule_displacement(config(), drag);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ux(-32.0, 32.0), uz(-20.0 + 2.0 * std::abs(d.y()) + 6.0, 19.0);
  std::uniform_int_distribution<int> kind(0, 2);
  int correct = 0, total = 0;
  for (int scene_index = 0; scene_index < 100; ++scene_index) {
    Scene s;
    s.region = {-40, 40, -20, 25};
    s.seed = 1000 + static_cast<std::uint64_t>(scene_index);
    while (s.impurities.size() < 3) {
      const Vec2 p(ux(rng), uz(rng));
      bool ok = true;
      for (const auto& other : s.impurities) ok &= (other.position - p).norm() > 4.0 * opt.link_radius;
      if (ok) s.impurities.push_back({static_cast<ImpurityKind>(kind(rng)), p, 0.0});
    }
    const auto before = render_frame(tables(), s);
    const auto after = render_frame(tables(), advance_scene(s, drag, config()));
    const auto spots = classify_spots(before, after, drag, config(), opt);
    for (const auto& imp : s.impurities) {
      ++total;
      SpotLabel got = SpotLabel::unresolved;
      double best = 4.0;
      for (const auto& c : spots.clusters) {
        const double r = (c.centroid_before - imp.position).norm();
        if (r < best) {
          best = r;
          got = c.label;
        }
      }
      const SpotLabel want = imp.kind == ImpurityKind::molecule  ? SpotLabel::molecule
                             : imp.kind == ImpurityKind::ns_atom ? SpotLabel::ns_atom
                                                                 : SpotLabel::np_atom;
      correct += got == want;
    }
  }
  EXPECT_GE(static_cast<double>(correct) / total, 0.95) << correct << " of " << total;
}
