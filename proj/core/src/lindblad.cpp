#include "macrodimer/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>

#include "macrodimer/error.hpp"

namespace macrodimer {

namespace {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

constexpr cd I{0.0, 1.0};

// phi_k(z) = sum_j z^j / (j + k)!
std::array<cd, 3> phi123(cd z) {
  if (std::abs(z) < 0.2) {
    std::array<cd, 3> out{};
    for (int k = 1; k <= 3; ++k) {
      cd term = 1.0;
      for (int j = 1; j <= k; ++j) term /= static_cast<double>(j);
      cd sum = term;
      for (int j = 1; j < 24; ++j) {
        term *= z / static_cast<double>(j + k);
        sum += term;
      }
      out[static_cast<std::size_t>(k - 1)] = sum;
    }
    return out;
  }
  const cd e = std::exp(z);
  const cd p1 = (e - 1.0) / z;
  const cd p2 = (p1 - 1.0) / z;
  const cd p3 = (p2 - 0.5) / z;
  return {p1, p2, p3};
}

// Coherent block over {g, e, k...} with the non-Hermitian decay terms.
CMat effective_hamiltonian(const ProbeDrive& d) {
  const int n = 2 + static_cast<int>(d.levels());
  CMat h = CMat::Zero(n, n);
  h(0, 1) = h(1, 0) = 0.5 * d.omega_p;
  h(1, 1) = cd(d.delta_p, -0.5 * d.gamma_p);
  for (int k = 0; k < static_cast<int>(d.levels()); ++k) {
    const double c = 0.5 * d.omega_c * d.level_couplings[static_cast<std::size_t>(k)];
    h(1, 2 + k) = h(2 + k, 1) = c;
    h(2 + k, 2 + k) = cd(d.level_detunings[static_cast<std::size_t>(k)], -0.5 * d.gamma_c);
  }
  return h;
}

ProbePopulations finish(const CMat& coherent, double gprime) {
  const int n = static_cast<int>(coherent.rows());
  ProbePopulations p;
  p.g = coherent(0, 0).real();
  p.e = coherent(1, 1).real();
  p.gprime = gprime;
  p.k.resize(static_cast<std::size_t>(n - 2));
  double tr = p.g + p.e + p.gprime;
  for (int k = 2; k < n; ++k) {
    p.k[static_cast<std::size_t>(k - 2)] = coherent(k, k).real();
    tr += coherent(k, k).real();
  }
  p.trace_error = std::abs(tr - 1.0);
  const CMat herm = 0.5 * (coherent + coherent.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(herm, Eigen::EigenvaluesOnly);
  p.min_eigenvalue = std::min(es.eigenvalues().minCoeff(), gprime);
  return p;
}

ProbePopulations evolve_runge_kutta(const ProbeDrive& d, double t, const LindbladOptions& opt) {
  namespace ode = boost::numeric::odeint;
  const CMat heff = effective_hamiltonian(d);
  const CMat heff_adj = heff.adjoint();
  const int n = static_cast<int>(heff.rows());
  using State = std::vector<double>;
  // state: coherent block (2 n^2 reals, column-major complex) followed by p_g'
  State x(static_cast<std::size_t>(2 * n * n + 1), 0.0);
  x[0] = 1.0;
  const double half_gp = 0.5 * d.gamma_p;
  auto rhs = [&](const State& s, State& ds, double) {
    Eigen::Map<const CMat> rho(reinterpret_cast<const cd*>(s.data()), n, n);
    Eigen::Map<CMat> drho(reinterpret_cast<cd*>(ds.data()), n, n);
    drho.noalias() = -I * (heff * rho);
    drho.noalias() += I * (rho * heff_adj);
    double recycle = half_gp * rho(1, 1).real();
    for (int k = 2; k < n; ++k) recycle += d.gamma_c * rho(k, k).real();
    drho(0, 0) += recycle;
    ds.back() = half_gp * rho(1, 1).real();
  };
  if (t > 0) {
    try {
      auto stepper = ode::make_controlled(opt.abs_tolerance, opt.rel_tolerance, ode::runge_kutta_dopri5<State>());
      const double dt0 = std::min(t, 1e-4);
      const std::size_t steps = ode::integrate_adaptive(stepper, rhs, x, 0.0, t, dt0);
      (void)steps;
    } catch (const std::exception& ex) {
      std::ostringstream msg;
      msg << "master-equation step-size failure at tolerances rel " << opt.rel_tolerance << ", abs "
          << opt.abs_tolerance << ": " << ex.what();
      throw IntegratorError(msg.str());
    }
    for (double v : x)
      if (!std::isfinite(v)) throw IntegratorError("master-equation state became non-finite");
  }
  Eigen::Map<const CMat> rho(reinterpret_cast<const cd*>(x.data()), n, n);
  return finish(rho, x.back());
}

ProbePopulations evolve_eigenbasis(const ProbeDrive& d, double t, const LindbladOptions& opt) {
  const CMat heff = effective_hamiltonian(d);
  const int n = static_cast<int>(heff.rows());
  Eigen::ComplexEigenSolver<CMat> es(heff);
  if (es.info() != Eigen::Success) {
    LindbladOptions fallback = opt;
    fallback.method = LindbladMethod::runge_kutta;
    return evolve_runge_kutta(d, t, fallback);
  }
  const CMat& v = es.eigenvectors();
  Eigen::PartialPivLU<CMat> lu(v);
  const CMat vinv = lu.inverse();
  const double cond = v.operatorNorm() * vinv.operatorNorm();
  if (!std::isfinite(cond) || cond > opt.max_condition) return evolve_runge_kutta(d, t, opt);

  const CVec& lambda = es.eigenvalues();
  // sigma = V^-1 rho V^-H evolves as sigma_ab' = x_ab sigma_ab + r G_ab
  CMat x(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) x(a, b) = -I * (lambda[a] - std::conj(lambda[b]));
  const CVec u = vinv.col(0);
  const CMat g = u * u.adjoint();
  CMat jump = CMat::Zero(n, n);
  jump(1, 1) = 0.5 * d.gamma_p;
  for (int k = 2; k < n; ++k) jump(k, k) = d.gamma_c;
  CMat pe = CMat::Zero(n, n);
  pe(1, 1) = 1.0;
  // tr(A V sigma V^H) = sum_ab sigma_ab (V^H A V)_ba
  const CMat w = (v.adjoint() * jump * v).transpose();
  const CMat we = (v.adjoint() * pe * v).transpose();

  CMat sigma = g;  // rho(0) = |g><g|
  double gprime = 0.0;
  if (t > 0) {
    const int steps = std::max(1, static_cast<int>(std::ceil(t / opt.max_step)));
    const double h = t / steps;
    CMat e1(n, n), a_lo(n, n), a_hi(n, n), i_lo(n, n), i_hi(n, n), i_sig(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const cd z = x(a, b) * h;
        const auto p = phi123(z);
        e1(a, b) = std::exp(z);
        a_lo(a, b) = g(a, b) * h * (p[0] - p[1]);
        a_hi(a, b) = g(a, b) * h * p[1];
        i_sig(a, b) = h * p[0];
        i_lo(a, b) = g(a, b) * h * h * (p[1] - p[2]);
        i_hi(a, b) = g(a, b) * h * h * p[2];
      }
    const double denom = 1.0 - (w.cwiseProduct(a_hi)).sum().real();
    double r = (w.cwiseProduct(sigma)).sum().real();
    for (int s = 0; s < steps; ++s) {
      const CMat base = e1.cwiseProduct(sigma) + r * a_lo;
      const double r_next = (w.cwiseProduct(base)).sum().real() / denom;
      const CMat integral = i_sig.cwiseProduct(sigma) + r * i_lo + r_next * i_hi;
      gprime += 0.5 * d.gamma_p * (we.cwiseProduct(integral)).sum().real();
      sigma = base + r_next * a_hi;
      r = r_next;
    }
  }
  const CMat rho = v * sigma * v.adjoint();
  return finish(rho, gprime);
}

}  // namespace

void ProbeDrive::validate() const {
  if (!(gamma_p > 0)) throw InvalidArgument("gamma_p must be positive");
  if (!(gamma_c >= 0)) throw InvalidArgument("gamma_c must be non-negative");
  if (level_detunings.size() != level_couplings.size())
    throw InvalidArgument("dressed-level detunings and couplings differ in length");
  for (double f : level_couplings)
    if (!(f >= 0) || !std::isfinite(f)) throw InvalidArgument("dressed-level coupling must be finite and >= 0");
  for (double dk : level_detunings)
    if (!std::isfinite(dk)) throw InvalidArgument("dressed-level detuning must be finite");
}

ProbePopulations evolve_probe(const ProbeDrive& drive, double t, const LindbladOptions& options) {
  drive.validate();
  if (!(t >= 0)) throw InvalidArgument("evolution time must be >= 0");
  if (t == 0.0) {
    ProbePopulations p;
    p.k.assign(drive.levels(), 0.0);
    return p;
  }
  if (options.method == LindbladMethod::runge_kutta) return evolve_runge_kutta(drive, t, options);
  return evolve_eigenbasis(drive, t, options);
}

std::complex<double> steady_state_susceptibility(const ProbeDrive& drive) {
  drive.validate();
  ProbeDrive closed = drive;
  const CMat heff_open = effective_hamiltonian(closed);
  const int n = static_cast<int>(heff_open.rows());
  const CMat id = CMat::Identity(n, n);
  // column-stacked vec: vec(A rho B) = (B^T kron A) vec(rho)
  auto kron = [](const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
  };
  CMat l = -I * kron(id, heff_open) + I * kron(heff_open.conjugate(), id);
  auto add_jump = [&](int from, double rate) {
    CMat j = CMat::Zero(n, n);
    j(0, from) = std::sqrt(rate);
    l += kron(j.conjugate(), j);
  };
  // closed system: e decays to g at the full Gamma_p
  add_jump(1, closed.gamma_p);
  for (int k = 2; k < n; ++k) add_jump(k, closed.gamma_c);
  CVec rhs = CVec::Zero(n * n);
  l.row(0).setZero();
  for (int i = 0; i < n; ++i) l(0, i * n + i) = 1.0;
  rhs[0] = 1.0;
  const CVec rho = l.fullPivLu().solve(rhs);
  const cd rho_eg = rho[0 * n + 1];  // element (1, 0)
  return -drive.gamma_p * rho_eg / drive.omega_p;
}

double pumping_rate(const ProbeDrive& drive) {
  drive.validate();
  cd s = 0.0;
  for (std::size_t k = 0; k < drive.levels(); ++k) {
    const double c = 0.5 * drive.omega_c * drive.level_couplings[k];
    s += c * c / cd(drive.level_detunings[k], -0.5 * drive.gamma_c);
  }
  const cd a_e = -0.5 * drive.omega_p / (cd(drive.delta_p, -0.5 * drive.gamma_p) - s);
  return 0.5 * drive.gamma_p * std::norm(a_e);
}

}  // namespace macrodimer
