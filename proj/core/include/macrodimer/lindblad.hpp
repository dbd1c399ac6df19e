#pragma once

#include <complex>
#include <vector>

namespace macrodimer {

/// Probe atom with states {g, g', e} plus dressed Rydberg levels k, driven by
/// H = Delta_p |e><e| + sum_k Delta_k |k><k| + Omega_p/2 (|e><g| + h.c.)
///   + sum_k Omega_c f_k/2 (|k><e| + h.c.)
/// and the jumps e -> g, e -> g' (Gamma_p/2 each) and k -> g (Gamma_c).
struct ProbeDrive {
  double gamma_p = 0.0;
  double gamma_c = 0.0;
  double omega_p = 0.0;
  double omega_c = 0.0;
  double delta_p = 0.0;
  std::vector<double> level_detunings;  // Delta_k, rad/us
  std::vector<double> level_couplings;  // f_k >= 0 (amplitude, so f_k^2 is the weight)

  std::size_t levels() const { return level_detunings.size(); }
  void validate() const;
};

struct ProbePopulations {
  double g = 1.0;
  double gprime = 0.0;
  double e = 0.0;
  std::vector<double> k;
  double trace_error = 0.0;     // |tr(rho) - 1|
  double min_eigenvalue = 0.0;  // smallest eigenvalue of rho
};

enum class LindbladMethod {
  // Exponential integrator in the eigenbasis of the non-Hermitian effective
  // Hamiltonian; the recycling term r(t) |g><g| is treated as piecewise linear.
  eigenbasis,
  // Adaptive Dormand-Prince on the vectorized density matrix.
  runge_kutta,
};

struct LindbladOptions {
  LindbladMethod method = LindbladMethod::eigenbasis;
  double max_step = 5e-4;       // us, eigenbasis method
  double rel_tolerance = 1e-8;  // runge_kutta method
  double abs_tolerance = 1e-10;
  // Condition number of the eigenvector matrix above which the eigenbasis
  // method hands over to runge_kutta.
  double max_condition = 1e8;
};

/// Populations after evolving from |g> for time t (us).
ProbePopulations evolve_probe(const ProbeDrive& drive, double t, const LindbladOptions& options = {});

/// Weak-probe steady-state coherence <e|rho|g> of the closed system (e decays
/// to g only, at Gamma_p), normalized as -Gamma_p rho_eg / Omega_p so that the
/// bare resonant two-level value is i.
std::complex<double> steady_state_susceptibility(const ProbeDrive& drive);

/// Two-level pumping estimate used as an oracle: adiabatic elimination of the
/// coherences gives P_g'(t) = 1 - exp(-kappa t), kappa = Gamma_p/2 |a_e|^2.
double pumping_rate(const ProbeDrive& drive);

}  // namespace macrodimer
