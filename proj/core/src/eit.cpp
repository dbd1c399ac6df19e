#include "macrodimer/eit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "macrodimer/error.hpp"
#include "macrodimer/parallel.hpp"

namespace macrodimer {

namespace {

constexpr int kNsDown = 0;  // single-atom index of ns, jz = -1/2
constexpr int kNsUp = 1;

ProbeSpectrum project(const ComplexMatrix& h, const std::array<ComplexVector, 2>& refs, double e0) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  ProbeSpectrum s;
  s.e0 = e0;
  const Eigen::VectorXd w0 = (es.eigenvectors().adjoint() * refs[0]).cwiseAbs2();
  const Eigen::VectorXd w1 = (es.eigenvectors().adjoint() * refs[1]).cwiseAbs2();
  s.levels.resize(static_cast<std::size_t>(h.rows()));
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    ProbeLevel& l = s.levels[static_cast<std::size_t>(k)];
    l.shift = es.eigenvalues()[k] - e0;
    l.weight_jz = {w0[k], w1[k]};
    l.weight = w0[k] + w1[k];
  }
  return s;
}

}  // namespace

double ProbeSpectrum::total_weight() const {
  double t = 0.0;
  for (const auto& l : levels) t += l.weight;
  return t;
}

MoleculeProbe::MoleculeProbe(const PhysicalConfig& config, const BoundState& molecule)
    : molecule_(molecule), model_(config, build_basis(3, 1)) {
  const ProductBasis& pair = *molecule_.basis;
  if (pair.n_atoms() != 2) throw InvalidArgument("molecule state must be a two-atom state");
  for (int jz = 0; jz < 2; ++jz) {
    ComplexVector r = ComplexVector::Zero(model_.dimension());
    for (int i = 0; i < pair.dimension(); ++i) {
      auto s = pair.state(i);
      const std::array<int, 3> triple{s[0], s[1], jz == 0 ? kNsDown : kNsUp};
      const int idx = model_.basis().index_of(triple);
      if (idx < 0) throw InvalidArgument("molecule state outside the one-excitation sector");
      r[idx] = molecule_.psi[i];
    }
    refs_[static_cast<std::size_t>(jz)] = r;
  }
}

ProbeSpectrum MoleculeProbe::spectrum(const Vec3& probe) const {
  Geometry g{{molecule_.geometry.positions[0], molecule_.geometry.positions[1], probe}};
  return project(model_.hamiltonian(g), refs_, molecule_.energy);
}

ProbeSpectrum three_atom_spectrum(const PhysicalConfig& config, const Geometry& molecule_geometry,
                                  const Vec3& probe_position) {
  const BoundStateTracker tracker(config);
  return MoleculeProbe(config, tracker.solve(molecule_geometry)).spectrum(probe_position);
}

ProbeSpectrum single_impurity_spectrum(const PhysicalConfig& config, const SingleAtomState& impurity,
                                       const Vec3& relative_position) {
  if (!impurity.valid()) throw InvalidArgument("invalid impurity state");
  const double r = relative_position.norm();
  if (!(r > 1e-9)) throw SingularGeometry("probe coincides with the impurity");
  if (impurity.level == Level::nS) {
    const double shift = -config.c6 / std::pow(r, 6);
    return ProbeSpectrum{0.0, {ProbeLevel{shift, 2.0, {1.0, 1.0}}}};
  }
  const InteractionModel model(config, build_basis(2, 1));
  const int imp = single_atom_index(impurity);
  std::array<ComplexVector, 2> refs;
  for (int jz = 0; jz < 2; ++jz) {
    refs[static_cast<std::size_t>(jz)] = ComplexVector::Zero(model.dimension());
    const std::array<int, 2> pair{imp, jz == 0 ? kNsDown : kNsUp};
    refs[static_cast<std::size_t>(jz)][model.basis().index_of(pair)] = 1.0;
  }
  const double e0 = impurity.level == Level::nP12 ? config.delta : 0.0;
  const Geometry g{{Vec3::Zero(), relative_position}};
  return project(model.hamiltonian(g), refs, e0);
}

std::complex<double> susceptibility(const PhysicalConfig& config, const ProbeSpectrum& spectrum) {
  using cd = std::complex<double>;
  cd denom(config.gamma_p, -config.delta_p);
  const double oc2 = config.omega_c * config.omega_c;
  for (const auto& l : spectrum.levels) {
    if (l.weight == 0.0) continue;
    const double dk = config.delta_p + config.delta_c + l.shift;
    denom += oc2 * l.weight / cd(config.gamma_c, -dk);
  }
  return cd(0.0, config.gamma_p) / denom;
}

std::vector<DressedLevel> dressed_levels(const ProbeSpectrum& spectrum, double weight_cutoff) {
  std::vector<ProbeLevel> sorted = spectrum.levels;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.shift < b.shift; });
  std::vector<DressedLevel> out;
  double scale = 1.0;
  for (const auto& l : sorted) scale = std::max(scale, std::abs(l.shift));
  const double tol = 1e-9 * scale;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j].shift - sorted[j - 1].shift <= tol) ++j;
    DressedLevel d;
    double total = 0.0;
    double wsum = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      d.weight_jz[0] += sorted[k].weight_jz[0];
      d.weight_jz[1] += sorted[k].weight_jz[1];
      total += sorted[k].weight;
      wsum += sorted[k].shift * sorted[k].weight;
    }
    d.shift = total > 0 ? wsum / total : sorted[i].shift;
    if (total > weight_cutoff) out.push_back(d);
    i = j;
  }
  return out;
}

ProbeDrive probe_drive(const PhysicalConfig& config, const std::vector<DressedLevel>& levels, int jz_index) {
  if (jz_index != 0 && jz_index != 1) throw InvalidArgument("probe jz index must be 0 or 1");
  ProbeDrive d;
  d.gamma_p = config.gamma_p;
  d.gamma_c = config.gamma_c;
  d.omega_p = config.omega_p;
  d.omega_c = config.omega_c;
  d.delta_p = config.delta_p;
  for (const auto& l : levels) {
    d.level_detunings.push_back(config.delta_p + config.delta_c + l.shift);
    d.level_couplings.push_back(std::sqrt(l.weight_jz[static_cast<std::size_t>(jz_index)]));
  }
  return d;
}

ProbeEvolution probe_master_equation(const PhysicalConfig& config, const ProbeSpectrum& spectrum, double t,
                                     const LindbladOptions& options) {
  ProbeEvolution out;
  out.levels = dressed_levels(spectrum);
  out.pop_g = out.pop_gprime = out.pop_e = 0.0;
  out.pop_k.assign(out.levels.size(), 0.0);
  out.min_eigenvalue = 1.0;
  for (int jz = 0; jz < 2; ++jz) {
    const ProbePopulations p = evolve_probe(probe_drive(config, out.levels, jz), t, options);
    out.pop_g += 0.5 * p.g;
    out.pop_gprime += 0.5 * p.gprime;
    out.pop_e += 0.5 * p.e;
    for (std::size_t k = 0; k < p.k.size(); ++k) out.pop_k[k] += 0.5 * p.k[k];
    out.trace_error = std::max(out.trace_error, p.trace_error);
    out.min_eigenvalue = std::min(out.min_eigenvalue, p.min_eigenvalue);
  }
  return out;
}

SusceptibilityField chi_map(const MoleculeProbe& probe, const std::vector<double>& z_grid,
                            const std::vector<double>& rho_grid, int threads) {
  SusceptibilityField f{z_grid, rho_grid, Eigen::MatrixXcd(z_grid.size(), rho_grid.size())};
  const std::size_t nr = rho_grid.size();
  parallel_for(z_grid.size() * nr, threads, [&](std::size_t idx) {
    const std::size_t i = idx / nr, j = idx % nr;
    const ProbeSpectrum s = probe.spectrum(Vec3(rho_grid[j], 0.0, z_grid[i]));
    f.chi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = susceptibility(probe.config(), s);
  });
  return f;
}

PopulationField population_map(const MoleculeProbe& probe, const std::vector<double>& z_grid,
                               const std::vector<double>& rho_grid, double exposure, int threads,
                               const LindbladOptions& options) {
  PopulationField f{z_grid, rho_grid, Eigen::MatrixXd(z_grid.size(), rho_grid.size()), exposure};
  const std::size_t nr = rho_grid.size();
  parallel_for(z_grid.size() * nr, threads, [&](std::size_t idx) {
    const std::size_t i = idx / nr, j = idx % nr;
    const ProbeSpectrum s = probe.spectrum(Vec3(rho_grid[j], 0.0, z_grid[i]));
    f.p_gprime(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        probe_master_equation(probe.config(), s, exposure, options).pop_gprime;
  });
  return f;
}

SusceptibilityField chi_map(const PhysicalConfig& config, const Geometry& molecule_geometry,
                            const std::vector<double>& z_grid, const std::vector<double>& rho_grid, int threads) {
  const BoundStateTracker tracker(config, threads);
  return chi_map(MoleculeProbe(config, tracker.solve(molecule_geometry)), z_grid, rho_grid, threads);
}

PopulationField population_map(const PhysicalConfig& config, const Geometry& molecule_geometry,
                               const std::vector<double>& z_grid, const std::vector<double>& rho_grid,
                               double exposure, int threads, const LindbladOptions& options) {
  const BoundStateTracker tracker(config, threads);
  return population_map(MoleculeProbe(config, tracker.solve(molecule_geometry)), z_grid, rho_grid, exposure,
                        threads, options);
}

std::vector<double> cell_centred_grid(double lo, double hi, int n) {
  if (n < 1 || !(hi > lo)) throw InvalidArgument("grid needs n >= 1 and hi > lo");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double h = (hi - lo) / n;
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + h * (i + 0.5);
  return g;
}

}  // namespace macrodimer
