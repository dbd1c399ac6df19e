#include <benchmark/benchmark.h>

#include "macrodimer/angular.hpp"
#include "macrodimer/dynamics.hpp"
#include "macrodimer/eit.hpp"
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

const MoleculeProbe& probe() {
  static const MoleculeProbe p(config(), tracker().reference());
  return p;
}

}  // namespace

static void BM_Wigner3j(benchmark::State& state) {
  for (auto _ : state) {
    double s = 0.0;
    for (int tj = 0; tj <= 12; tj += 2) s += wigner_3j(HalfInt{tj}, HalfInt{2}, HalfInt{tj}, HalfInt{0}, HalfInt{0}, HalfInt{0});
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_Wigner3j);

static void BM_Hamiltonian(benchmark::State& state) {
  const int atoms = static_cast<int>(state.range(0));
  const InteractionModel m(config(), build_basis(atoms, 1));
  Geometry g = Geometry::pair_on_axis(1.65);
  if (atoms == 3) g.positions.push_back(Vec3(1.5, 0.0, 0.4));
  for (auto _ : state) benchmark::DoNotOptimize(m.hamiltonian(g));
}
BENCHMARK(BM_Hamiltonian)->Arg(2)->Arg(3);

static void BM_BoundStateSolve(benchmark::State& state) {
  const Geometry g = Geometry::pair_on_axis(1.8, Vec3(0.3, 0.0, 1.0).normalized());
  for (auto _ : state) benchmark::DoNotOptimize(tracker().solve(g));
}
BENCHMARK(BM_BoundStateSolve)->Unit(benchmark::kMicrosecond);

static void BM_ThreeAtomSpectrum(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(probe().spectrum(Vec3(1.2, 0.0, 0.7)));
}
BENCHMARK(BM_ThreeAtomSpectrum)->Unit(benchmark::kMicrosecond);

static void BM_ProbeMasterEquation(benchmark::State& state) {
  const auto s = probe().spectrum(Vec3(1.2, 0.0, 0.7));
  for (auto _ : state) benchmark::DoNotOptimize(probe_master_equation(config(), s, 2.0, LindbladOptions{}));
}
BENCHMARK(BM_ProbeMasterEquation)->Unit(benchmark::kMillisecond);

static void BM_DragTrajectory(benchmark::State& state) {
  DragConfig d;
  d.alpha = units::ghz_per_um(0.08);
  for (auto _ : state) benchmark::DoNotOptimize(integrate(tracker(), equilibrium_start(tracker().well()), d));
}
BENCHMARK(BM_DragTrajectory)->Unit(benchmark::kMillisecond);

static void BM_RenderFrame(benchmark::State& state) {
  TableOptions t;
  t.step = 1.0;
  t.extent = 4.0;
  t.np_step = 2.0;
  t.np_extent = 8.0;
  static const ImagingTables tables = ImagingTables::build(config(), tracker(), 2.0, t);
  Scene s;
  s.region = {-40, 40, -20, 25};
  s.impurities = {{ImpurityKind::molecule, Vec2(-25, 10), 0.0}, {ImpurityKind::np_atom, Vec2(25, 0), 0.0}};
  for (auto _ : state) {
    s.seed++;
    benchmark::DoNotOptimize(render_frame(tables, s));
  }
}
BENCHMARK(BM_RenderFrame)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
