#pragma once

#include <array>
#include <complex>
#include <memory>
#include <vector>

#include "macrodimer/lindblad.hpp"
#include "macrodimer/potential.hpp"

namespace macrodimer {

struct ProbeLevel {
  double shift = 0.0;  // E_k - E_0, rad/us
  double weight = 0.0;  // F_k^2 summed over the probe jz
  std::array<double, 2> weight_jz{};  // probe jz = -1/2, +1/2
};

/// Dressed levels seen by a probe atom whose ns state is shifted by an impurity.
struct ProbeSpectrum {
  double e0 = 0.0;  // rad/us, impurity energy with the probe at infinity
  std::vector<ProbeLevel> levels;

  double total_weight() const;
};

/// Three-atom spectra for a probe near a fixed molecule. The bound-state
/// vector is embedded once; each call assembles and diagonalizes the 72-dim
/// one-excitation Hamiltonian.
class MoleculeProbe {
 public:
  MoleculeProbe(const PhysicalConfig& config, const BoundState& molecule);

  const BoundState& molecule() const { return molecule_; }
  const PhysicalConfig& config() const { return model_.config(); }
  ProbeSpectrum spectrum(const Vec3& probe) const;

 private:
  BoundState molecule_;
  InteractionModel model_;
  std::array<ComplexVector, 2> refs_;
};

ProbeSpectrum three_atom_spectrum(const PhysicalConfig& config, const Geometry& molecule_geometry,
                                  const Vec3& probe_position);

/// Probe next to a single Rydberg impurity. For an np impurity the two-atom
/// one-excitation spectrum is used with the impurity in `impurity` and the
/// probe in ns. For an ns impurity there is no resonant exchange and the
/// probe level is shifted by the van der Waals term -C6/R^6.
ProbeSpectrum single_impurity_spectrum(const PhysicalConfig& config, const SingleAtomState& impurity,
                                       const Vec3& relative_position);

/// chi = i Gamma_p / (Gamma_p - i Delta_p + sum_k Omega_c^2 F_k^2 / (Gamma_c - i Delta_k)),
/// Delta_k = Delta_p + Delta_c + E_k - E_0.
std::complex<double> susceptibility(const PhysicalConfig& config, const ProbeSpectrum& spectrum);

/// Levels entering the master equation: degenerate levels merged, F_k^2 > cutoff.
struct DressedLevel {
  double shift = 0.0;
  std::array<double, 2> weight_jz{};
};
std::vector<DressedLevel> dressed_levels(const ProbeSpectrum& spectrum, double weight_cutoff = 1e-4);
/// Drive for one probe jz (0 -> -1/2, 1 -> +1/2).
ProbeDrive probe_drive(const PhysicalConfig& config, const std::vector<DressedLevel>& levels, int jz_index);

struct ProbeEvolution {
  double pop_g = 1.0;
  double pop_gprime = 0.0;
  double pop_e = 0.0;
  std::vector<double> pop_k;  // aligned with `levels`
  std::vector<DressedLevel> levels;
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;
};

/// Averaged over the two probe jz ground states.
ProbeEvolution probe_master_equation(const PhysicalConfig& config, const ProbeSpectrum& spectrum, double t,
                                     const LindbladOptions& options = {});

struct SusceptibilityField {
  std::vector<double> z_grid;    // um
  std::vector<double> rho_grid;  // um
  Eigen::MatrixXcd chi;          // rows: z, cols: rho
};

struct PopulationField {
  std::vector<double> z_grid;
  std::vector<double> rho_grid;
  Eigen::MatrixXd p_gprime;  // rows: z, cols: rho
  double exposure = 0.0;     // us
};

/// Probe positions are (x, y, z) = (rho, 0, z) in the frame of `molecule_geometry`.
SusceptibilityField chi_map(const PhysicalConfig& config, const Geometry& molecule_geometry,
                            const std::vector<double>& z_grid, const std::vector<double>& rho_grid, int threads = 0);
PopulationField population_map(const PhysicalConfig& config, const Geometry& molecule_geometry,
                               const std::vector<double>& z_grid, const std::vector<double>& rho_grid,
                               double exposure = 2.0, int threads = 0, const LindbladOptions& options = {});

/// Same maps given an already tracked molecule.
SusceptibilityField chi_map(const MoleculeProbe& probe, const std::vector<double>& z_grid,
                            const std::vector<double>& rho_grid, int threads = 0);
PopulationField population_map(const MoleculeProbe& probe, const std::vector<double>& z_grid,
                               const std::vector<double>& rho_grid, double exposure = 2.0, int threads = 0,
                               const LindbladOptions& options = {});

/// Cell-centred grid of `n` points covering [lo, hi].
std::vector<double> cell_centred_grid(double lo, double hi, int n);

}  // namespace macrodimer
