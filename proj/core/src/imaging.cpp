#include "macrodimer/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>
#include <random>

#include "macrodimer/error.hpp"
#include "macrodimer/parallel.hpp"
#include "macrodimer/random.hpp"

namespace macrodimer {

namespace {

constexpr std::uint64_t kStreamPositions = 1;
constexpr std::uint64_t kStreamBernoulli = 2;
constexpr double kExclusionRadius = 0.1;  // um

struct ImpurityAtoms {
  std::vector<Vec2> atoms;
  Vec2 axis = Vec2(0.0, 1.0);  // (x, z) components of the molecule axis
};

ImpurityAtoms atoms_of(const Impurity& imp, double r_p) {
  ImpurityAtoms out;
  out.axis = Vec2(std::sin(imp.orientation), std::cos(imp.orientation));
  if (imp.kind == ImpurityKind::molecule) {
    out.atoms = {imp.position - 0.5 * r_p * out.axis, imp.position + 0.5 * r_p * out.axis};
  } else {
    out.atoms = {imp.position};
  }
  return out;
}

double far_field_population(const PhysicalConfig& config, double exposure, const LindbladOptions& options) {
  const ProbeSpectrum free{0.0, {ProbeLevel{0.0, 2.0, {1.0, 1.0}}}};
  return probe_master_equation(config, free, exposure, options).pop_gprime;
}

}  // namespace

std::string impurity_name(ImpurityKind kind) {
  switch (kind) {
    case ImpurityKind::molecule:
      return "molecule";
    case ImpurityKind::ns_atom:
      return "ns_atom";
    case ImpurityKind::np_atom:
      return "np_atom";
  }
  return "unknown";
}

ImpurityKind parse_impurity(const std::string& name) {
  if (name == "molecule") return ImpurityKind::molecule;
  if (name == "ns_atom") return ImpurityKind::ns_atom;
  if (name == "np_atom") return ImpurityKind::np_atom;
  throw InvalidArgument("unknown impurity kind '" + name + "' (expected molecule, ns_atom or np_atom)");
}

std::string spot_label_name(SpotLabel label) {
  switch (label) {
    case SpotLabel::molecule:
      return "molecule";
    case SpotLabel::ns_atom:
      return "ns_atom";
    case SpotLabel::np_atom:
      return "np_atom";
    case SpotLabel::unresolved:
      return "unresolved";
  }
  return "unresolved";
}

void Region::validate() const {
  if (!(x_max > x_min) || !(z_max > z_min)) throw InvalidArgument("region must have positive width and height");
}

void Scene::validate() const {
  region.validate();
  if (!(rho_2d > 0)) throw InvalidArgument("probe density must be positive");
  for (const auto& imp : impurities)
    if (!region.contains(imp.position)) throw InvalidArgument("impurity lies outside the scene region");
}

std::vector<Vec2> sample_probe_atoms(const Region& region, double rho_2d, std::uint64_t seed) {
  region.validate();
  if (!(rho_2d > 0)) throw InvalidArgument("probe density must be positive");
  std::mt19937_64 rng(splitmix64(seed));
  std::poisson_distribution<std::uint64_t> count(rho_2d * region.area());
  const std::uint64_t n = count(rng);
  std::vector<Vec2> pts(n);
  const double w = region.x_max - region.x_min, h = region.z_max - region.z_min;
  for (std::uint64_t i = 0; i < n; ++i)
    pts[i] = Vec2(region.x_min + w * counter_uniform(seed, kStreamPositions, 2 * i),
                  region.z_min + h * counter_uniform(seed, kStreamPositions, 2 * i + 1));
  return pts;
}

GprimeTable::GprimeTable(double step, Eigen::MatrixXd values) : step_(step), values_(std::move(values)) {
  if (!(step_ > 0) || values_.rows() < 2 || values_.cols() < 2)
    throw InvalidArgument("lookup table needs a positive step and at least 2x2 nodes");
}

double GprimeTable::operator()(double z, double rho) const {
  const double fz = std::abs(z) / step_, fr = std::abs(rho) / step_;
  const auto last_z = static_cast<double>(values_.rows() - 1), last_r = static_cast<double>(values_.cols() - 1);
  if (fz > last_z || fr > last_r) return 0.0;
  const auto i = std::min(static_cast<Eigen::Index>(fz), values_.rows() - 2);
  const auto j = std::min(static_cast<Eigen::Index>(fr), values_.cols() - 2);
  const double tz = fz - static_cast<double>(i), tr = fr - static_cast<double>(j);
  return (1 - tz) * ((1 - tr) * values_(i, j) + tr * values_(i, j + 1)) +
         tz * ((1 - tr) * values_(i + 1, j) + tr * values_(i + 1, j + 1));
}

ImagingTables ImagingTables::build(const PhysicalConfig& config, const BoundStateTracker& tracker, double exposure,
                                   const TableOptions& options, int threads) {
  if (!(options.step > 0) || !(options.extent > options.step) || !(options.np_step > 0) ||
      !(options.np_extent > options.np_step))
    throw InvalidArgument("invalid lookup-table grid");
  const double p_far = far_field_population(config, exposure, options.lindblad);
  auto excess = [&](double p) { return std::clamp((p - p_far) / (1.0 - p_far), 0.0, 1.0); };

  // f(z, rho) on the nodes (i * step, j * step), i, j = 0 .. extent / step.
  auto tabulate = [&](double step, double extent, auto&& f) {
    const int n = static_cast<int>(std::lround(extent / step)) + 1;
    Eigen::MatrixXd values(n, n);
    parallel_for(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), threads, [&](std::size_t idx) {
      const auto i = static_cast<Eigen::Index>(idx / static_cast<std::size_t>(n));
      const auto j = static_cast<Eigen::Index>(idx % static_cast<std::size_t>(n));
      values(i, j) = excess(f(step * static_cast<double>(i), step * static_cast<double>(j)));
    });
    return GprimeTable(step, std::move(values));
  };
  auto away_from_origin = [](double z, double rho) {
    Vec3 rel(rho, 0.0, z);
    if (rel.norm() < kExclusionRadius) rel.x() = kExclusionRadius;
    return rel;
  };

  const MoleculeProbe molecule(config, tracker.reference());
  const Vec3 atom_hi = tracker.reference().geometry.positions[1];
  std::vector<SingleAtomState> np_states;
  for (const auto& s : single_atom_states())
    if (s.level == Level::nP32) np_states.push_back(s);

  ImagingTables t;
  t.molecule = tabulate(options.step, options.extent, [&](double z, double rho) {
    Vec3 probe(rho, 0.0, z);
    if ((probe - atom_hi).norm() < kExclusionRadius) probe.x() = kExclusionRadius;
    return probe_master_equation(config, molecule.spectrum(probe), exposure, options.lindblad).pop_gprime;
  });
  t.ns_atom = tabulate(options.step, options.extent, [&](double z, double rho) {
    const auto spectrum = single_impurity_spectrum(config, {Level::nS, HalfInt{1}}, away_from_origin(z, rho));
    return probe_master_equation(config, spectrum, exposure, options.lindblad).pop_gprime;
  });
  t.np_atom = tabulate(options.np_step, options.np_extent, [&](double z, double rho) {
    double acc = 0.0;
    for (const auto& s : np_states)
      acc += probe_master_equation(config, single_impurity_spectrum(config, s, away_from_origin(z, rho)), exposure,
                                   options.lindblad)
                 .pop_gprime;
    return acc / static_cast<double>(np_states.size());
  });
  t.exposure = exposure;
  t.r_p = tracker.well().r_p;
  return t;
}

const GprimeTable& ImagingTables::table(ImpurityKind kind) const {
  switch (kind) {
    case ImpurityKind::molecule:
      return molecule;
    case ImpurityKind::ns_atom:
      return ns_atom;
    case ImpurityKind::np_atom:
      return np_atom;
  }
  return molecule;
}

ImageFrame render_frame(const ImagingTables& tables, const Scene& scene, double pixel_size) {
  scene.validate();
  if (!(pixel_size > 0)) throw InvalidArgument("pixel size must be positive");
  ImageFrame frame;
  frame.region = scene.region;
  frame.pixel_size = pixel_size;
  frame.nx = static_cast<int>(std::ceil((scene.region.x_max - scene.region.x_min) / pixel_size - 1e-9));
  frame.nz = static_cast<int>(std::ceil((scene.region.z_max - scene.region.z_min) / pixel_size - 1e-9));
  frame.counts = Eigen::MatrixXi::Zero(frame.nz, frame.nx);

  std::vector<ImpurityAtoms> atoms;
  for (const auto& imp : scene.impurities) atoms.push_back(atoms_of(imp, tables.r_p));

  const std::vector<Vec2> probes = sample_probe_atoms(scene.region, scene.rho_2d, scene.seed);
  frame.probe_atoms = probes.size();
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Vec2& p = probes[i];
    bool excluded = false;
    double dark = 1.0;
    for (std::size_t k = 0; k < scene.impurities.size() && !excluded; ++k) {
      for (const Vec2& a : atoms[k].atoms)
        if ((p - a).norm() < kExclusionRadius) excluded = true;
      const Vec2 rel = p - scene.impurities[k].position;
      const Vec2& ax = atoms[k].axis;
      const double along = rel.dot(ax);
      const double across = std::abs(rel.x() * ax.y() - rel.y() * ax.x());
      dark *= 1.0 - tables.table(scene.impurities[k].kind)(along, across);
    }
    if (excluded) {
      ++frame.excluded_atoms;
      continue;
    }
    if (counter_uniform(scene.seed, kStreamBernoulli, i) < 1.0 - dark) {
      frame.gprime_atoms.push_back(p);
      const int ix = std::clamp(static_cast<int>((p.x() - scene.region.x_min) / pixel_size), 0, frame.nx - 1);
      const int iz = std::clamp(static_cast<int>((p.y() - scene.region.z_min) / pixel_size), 0, frame.nz - 1);
      ++frame.counts(iz, ix);
    }
  }
  return frame;
}

DensityCheck validate_density(const PhysicalConfig& config, double rho_2d, double rc) {
  DensityCheck d;
  const double oc2 = config.omega_c * config.omega_c;
  const double op2 = config.omega_p * config.omega_p;
  d.rc_prime = std::pow(2.0 * config.c6 * config.gamma_p / oc2, 1.0 / 6.0);
  d.snr_bound = oc2 / (std::numbers::pi * d.rc_prime * d.rc_prime * op2);
  d.snr_ok = rho_2d <= d.snr_bound;
  d.dilute_factor = rho_2d * rc * rc * op2 / oc2;
  d.dilute_ok = d.dilute_factor < 0.1;
  return d;
}

std::vector<std::vector<std::size_t>> cluster_points(const std::vector<Vec2>& points, double link_radius) {
  const std::size_t n = points.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((points[i] - points[j]).norm() <= link_radius) {
        const std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(clusters.size());
      clusters.emplace_back();
    }
    clusters[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  return clusters;
}

Vec2 molecule_displacement(const PhysicalConfig& config, const DragConfig& drag) {
  const Vec3 dir = drag.direction.normalized();
  const double d = drag.alpha * drag.t_final * drag.t_final / (4.0 * config.mass);
  return -d * Vec2(dir.x(), dir.z());
}

ClassifiedSpots classify_spots(const ImageFrame& before, const ImageFrame& after, const DragConfig& drag,
                               const PhysicalConfig& config, const ClassifyOptions& options) {
  if (std::abs(before.pixel_size - after.pixel_size) > 1e-12 || before.region.x_min != after.region.x_min ||
      before.region.x_max != after.region.x_max || before.region.z_min != after.region.z_min ||
      before.region.z_max != after.region.z_max)
    throw InvalidArgument("before and after frames must share region and pixel size");
  const Vec2 shift = molecule_displacement(config, drag);
  const double d = shift.norm();
  if (!(d > 0)) throw InvalidArgument("the drag produces no displacement; spots cannot be classified");
  const Vec2 u = shift / d;

  struct Cluster {
    Vec2 centroid;
    std::size_t size;
    bool crowded = false;
  };
  auto clusters_of = [&](const ImageFrame& f) {
    std::vector<Cluster> out;
    for (const auto& c : cluster_points(f.gprime_atoms, options.link_radius)) {
      if (c.size() < options.min_cluster_size) continue;
      Vec2 m = Vec2::Zero();
      for (std::size_t i : c) m += f.gprime_atoms[i];
      out.push_back({m / static_cast<double>(c.size()), c.size()});
    }
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = i + 1; j < out.size(); ++j)
        if ((out[i].centroid - out[j].centroid).norm() < 2.0 * options.link_radius) out[i].crowded = out[j].crowded = true;
    return out;
  };
  const auto cb = clusters_of(before);
  const auto ca = clusters_of(after);

  struct Pair {
    double cost;
    std::size_t b, a;
    double delta;
  };
  std::vector<Pair> pairs;
  for (std::size_t b = 0; b < cb.size(); ++b)
    for (std::size_t a = 0; a < ca.size(); ++a) {
      const Vec2 dv = ca[a].centroid - cb[b].centroid;
      const double delta = dv.dot(u);
      const double perp = (dv - delta * u).norm();
      if (perp >= options.link_radius || delta <= -0.5 * d || delta >= 2.5 * d) continue;
      const double hyp = std::min({std::abs(delta), std::abs(delta - d), std::abs(delta - 2 * d)});
      pairs.push_back({hyp + perp, b, a, delta});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    return x.cost < y.cost || (x.cost == y.cost && (x.b < y.b || (x.b == y.b && x.a < y.a)));
  });

  ClassifiedSpots out;
  out.expected_displacement = d;
  out.clusters.resize(cb.size());
  std::vector<char> used_b(cb.size(), 0), used_a(ca.size(), 0);
  for (std::size_t b = 0; b < cb.size(); ++b) {
    out.clusters[b].centroid_before = cb[b].centroid;
    out.clusters[b].atoms_before = cb[b].size;
  }
  for (const Pair& p : pairs) {
    if (used_b[p.b] || used_a[p.a]) continue;
    used_b[p.b] = used_a[p.a] = 1;
    Spot& s = out.clusters[p.b];
    s.centroid_after = ca[p.a].centroid;
    s.displacement = p.delta;
    if (cb[p.b].crowded || ca[p.a].crowded) {
      s.label = SpotLabel::unresolved;
    } else if (std::abs(p.delta) < 0.5 * d) {
      s.label = SpotLabel::np_atom;
    } else if (std::abs(p.delta - d) < 0.25 * d) {
      s.label = SpotLabel::molecule;
    } else if (std::abs(p.delta - 2 * d) < 0.5 * d) {
      s.label = SpotLabel::ns_atom;
    } else {
      s.label = SpotLabel::unresolved;
    }
  }
  return out;
}

std::uint64_t second_frame_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x2f0e1d5c3b4a6978ULL); }

Scene advance_scene(const Scene& scene, const DragConfig& drag, const PhysicalConfig& config) {
  const Vec2 d = molecule_displacement(config, drag);
  Scene next = scene;
  for (auto& imp : next.impurities) {
    if (imp.kind == ImpurityKind::molecule) imp.position += d;
    if (imp.kind == ImpurityKind::ns_atom) imp.position += 2.0 * d;
  }
  next.seed = second_frame_seed(scene.seed);
  return next;
}

}  // namespace macrodimer
