#include "macrodimer/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "macrodimer/error.hpp"

namespace macrodimer {

namespace {

std::uint64_t encode(std::span<const int> atoms) {
  std::uint64_t code = 0;
  for (int a : atoms) code = code * kSingleAtomDim + static_cast<std::uint64_t>(a);
  return code;
}

bool is_p(int single) { return single_atom_states()[static_cast<std::size_t>(single)].level != Level::nS; }

ProductBasis enumerate(int n_atoms, std::optional<int> p_excitations) {
  if (n_atoms < 1 || n_atoms > 8) throw InvalidArgument("number of atoms must be in [1, 8]");
  if (p_excitations && (*p_excitations < 0 || *p_excitations > n_atoms))
    throw InvalidArgument("p-excitation count must be in [0, n_atoms]");
  std::vector<int> flat;
  std::vector<int> cur(static_cast<std::size_t>(n_atoms), 0);
  std::uint64_t total = 1;
  for (int i = 0; i < n_atoms; ++i) total *= kSingleAtomDim;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    for (int i = n_atoms - 1; i >= 0; --i) {
      cur[static_cast<std::size_t>(i)] = static_cast<int>(c % kSingleAtomDim);
      c /= kSingleAtomDim;
    }
    if (p_excitations) {
      int np = 0;
      for (int a : cur) np += is_p(a) ? 1 : 0;
      if (np != *p_excitations) continue;
    }
    flat.insert(flat.end(), cur.begin(), cur.end());
  }
  return ProductBasis(n_atoms, p_excitations, std::move(flat));
}

}  // namespace

void Geometry::validate() const {
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!positions[i].allFinite()) throw InvalidArgument("atom position is not finite");
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      if ((positions[i] - positions[j]).norm() < 1e-9)
        throw SingularGeometry("atoms " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
    }
  }
}

Geometry Geometry::pair_on_axis(double separation, const Vec3& axis, const Vec3& center) {
  const Vec3 n = axis.normalized();
  return Geometry{{center - 0.5 * separation * n, center + 0.5 * separation * n}};
}

ProductBasis::ProductBasis(int n_atoms, std::optional<int> p_excitations, std::vector<int> flat_states)
    : n_atoms_(n_atoms), p_excitations_(p_excitations), flat_(std::move(flat_states)) {
  if (n_atoms_ < 1) throw InvalidArgument("basis needs at least one atom");
  if (flat_.size() % static_cast<std::size_t>(n_atoms_) != 0)
    throw InvalidArgument("flat state list does not match the atom count");
  dimension_ = static_cast<int>(flat_.size() / static_cast<std::size_t>(n_atoms_));
  lookup_.reserve(static_cast<std::size_t>(dimension_));
  for (int i = 0; i < dimension_; ++i) {
    for (int a : state(i))
      if (a < 0 || a >= kSingleAtomDim) throw InvalidArgument("single-atom index out of range");
    if (!lookup_.emplace(encode(state(i)), i).second) throw InvalidArgument("duplicate basis state");
  }
}

const SingleAtomState& ProductBasis::atom_state(int i, int atom) const {
  return single_atom_states()[static_cast<std::size_t>(state(i)[static_cast<std::size_t>(atom)])];
}

int ProductBasis::index_of(std::span<const int> atoms) const {
  if (static_cast<int>(atoms.size()) != n_atoms_) return -1;
  auto it = lookup_.find(encode(atoms));
  return it == lookup_.end() ? -1 : it->second;
}

int ProductBasis::total_twice_jz(int i) const {
  int m = 0;
  for (int a : state(i)) m += single_atom_states()[static_cast<std::size_t>(a)].jz.twice;
  return m;
}

ProductBasis ProductBasis::with_total_jz(int twice_m) const {
  std::vector<int> flat;
  for (int i = 0; i < dimension_; ++i) {
    if (total_twice_jz(i) != twice_m) continue;
    auto s = state(i);
    flat.insert(flat.end(), s.begin(), s.end());
  }
  return ProductBasis(n_atoms_, p_excitations_, std::move(flat));
}

std::vector<int> ProductBasis::total_jz_sectors() const {
  std::set<int> m;
  for (int i = 0; i < dimension_; ++i) m.insert(total_twice_jz(i));
  return {m.begin(), m.end()};
}

ProductBasis build_basis(int n_atoms, int p_excitations) { return enumerate(n_atoms, p_excitations); }
ProductBasis build_full_basis(int n_atoms) { return enumerate(n_atoms, std::nullopt); }

InteractionModel::InteractionModel(PhysicalConfig config, ProductBasis basis)
    : config_(std::move(config)), basis_(std::make_shared<const ProductBasis>(std::move(basis))) {
  config_.validate();
  const int dim = basis_->dimension();
  const int n = basis_->n_atoms();

  internal_ = Eigen::VectorXd::Zero(dim);
  ns_mask_.assign(static_cast<std::size_t>(n), Eigen::VectorXd::Zero(dim));
  for (int s = 0; s < dim; ++s) {
    for (int a = 0; a < n; ++a) {
      const Level lv = basis_->atom_state(s, a).level;
      if (lv == Level::nP12) internal_[s] += config_.delta;
      if (lv == Level::nS) ns_mask_[static_cast<std::size_t>(a)][s] = 1.0;
    }
  }

  const CartesianDipoles d = cartesian_dipole_set(ReducedDipole::unit());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      PairTable table;
      table.i = i;
      table.j = j;
      for (int r = 0; r < dim; ++r) {
        auto sr = basis_->state(r);
        for (int c = 0; c < dim; ++c) {
          auto sc = basis_->state(c);
          bool spectators_match = true;
          for (int k = 0; k < n && spectators_match; ++k)
            if (k != i && k != j && sr[static_cast<std::size_t>(k)] != sc[static_cast<std::size_t>(k)])
              spectators_match = false;
          if (!spectators_match) continue;
          const int ri = sr[static_cast<std::size_t>(i)], ci = sc[static_cast<std::size_t>(i)];
          const int rj = sr[static_cast<std::size_t>(j)], cj = sc[static_cast<std::size_t>(j)];
          for (int b = 0; b < 3; ++b) {
            const std::complex<double> di = d[b](ri, ci);
            if (di == 0.0) continue;
            for (int e = 0; e < 3; ++e) {
              const std::complex<double> v = di * d[e](rj, cj);
              if (std::abs(v) > 1e-15) table.terms[static_cast<std::size_t>(3 * b + e)].push_back({r, c, v});
            }
          }
        }
      }
      pairs_.push_back(std::move(table));
    }
  }
}

Eigen::Matrix3d InteractionModel::coupling_tensor(const Vec3& r) const {
  const double r2 = r.squaredNorm();
  const double rn = std::sqrt(r2);
  const double inv3 = 1.0 / (r2 * rn);
  return config_.c3() * (Eigen::Matrix3d::Identity() * inv3 - 3.0 * (r * r.transpose()) * inv3 / r2);
}

ComplexMatrix InteractionModel::internal() const {
  return internal_.cast<std::complex<double>>().asDiagonal();
}

ComplexMatrix InteractionModel::dipole_dipole(const Geometry& geometry) const {
  if (static_cast<int>(geometry.size()) != basis_->n_atoms())
    throw InvalidArgument("geometry size does not match the basis");
  geometry.validate();
  ComplexMatrix v = ComplexMatrix::Zero(dimension(), dimension());
  for (const PairTable& p : pairs_) {
    const Eigen::Matrix3d q =
        coupling_tensor(geometry.positions[static_cast<std::size_t>(p.j)] - geometry.positions[static_cast<std::size_t>(p.i)]);
    for (int b = 0; b < 3; ++b)
      for (int e = 0; e < 3; ++e) {
        const double w = q(b, e);
        for (const Entry& t : p.terms[static_cast<std::size_t>(3 * b + e)]) v(t.row, t.col) += w * t.value;
      }
  }
  return v;
}

Eigen::VectorXd InteractionModel::applied_diagonal(const Geometry& geometry, const AppliedField& field) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(dimension());
  if (field.alpha == 0.0) return u;
  const Vec3 dir = field.direction.normalized();
  for (int a = 0; a < basis_->n_atoms(); ++a)
    u += field.alpha * dir.dot(geometry.positions[static_cast<std::size_t>(a)]) * ns_mask_[static_cast<std::size_t>(a)];
  return u;
}

ComplexMatrix InteractionModel::hamiltonian(const Geometry& geometry, const AppliedField* field) const {
  ComplexMatrix h = dipole_dipole(geometry);
  Eigen::VectorXd diag = internal_;
  if (field != nullptr) diag += applied_diagonal(geometry, *field);
  h.diagonal() += diag.cast<std::complex<double>>();
  return h;
}

double InteractionModel::ns_population(const ComplexVector& psi, int atom) const {
  return (psi.cwiseAbs2().array() * ns_mask(atom).array()).sum();
}

std::vector<Vec3> InteractionModel::dipole_dipole_gradient(const Geometry& geometry, const ComplexVector& psi) const {
  std::vector<Vec3> grad(geometry.size(), Vec3::Zero());
  const double c3 = config_.c3();
  for (const PairTable& p : pairs_) {
    // expectation values <d_b d_c> of this pair
    Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
    for (int b = 0; b < 3; ++b)
      for (int e = 0; e < 3; ++e) {
        std::complex<double> acc = 0.0;
        for (const Entry& t : p.terms[static_cast<std::size_t>(3 * b + e)])
          acc += std::conj(psi[t.row]) * t.value * psi[t.col];
        k(b, e) = acc.real();
      }
    const Vec3 r = geometry.positions[static_cast<std::size_t>(p.j)] - geometry.positions[static_cast<std::size_t>(p.i)];
    const double r2 = r.squaredNorm();
    const double rn = std::sqrt(r2);
    const double inv5 = 1.0 / (r2 * r2 * rn);
    const double inv7 = inv5 / r2;
    // d/dR_a of sum_bc Q_bc K_bc
    Vec3 g = Vec3::Zero();
    const double tr = k.trace();
    const Vec3 kr = k * r;
    const Vec3 ktr = k.transpose() * r;
    const double rkr = r.dot(kr);
    for (int a = 0; a < 3; ++a)
      g[a] = c3 * (-3.0 * tr * r[a] * inv5 - 3.0 * (kr[a] + ktr[a]) * inv5 + 15.0 * r[a] * rkr * inv7);
    grad[static_cast<std::size_t>(p.j)] += g;
    grad[static_cast<std::size_t>(p.i)] -= g;
  }
  return grad;
}

Eigen::VectorXd InteractionModel::total_jz() const {
  Eigen::VectorXd m(dimension());
  for (int i = 0; i < dimension(); ++i) m[i] = 0.5 * basis_->total_twice_jz(i);
  return m;
}

OperatorMatrix internal_hamiltonian(const ProductBasis& basis, const PhysicalConfig& config) {
  InteractionModel model(config, basis);
  return {model.basis_ptr(), model.internal()};
}

OperatorMatrix dipole_dipole(const ProductBasis& basis, const Geometry& geometry, const PhysicalConfig& config) {
  InteractionModel model(config, basis);
  return {model.basis_ptr(), model.dipole_dipole(geometry)};
}

bool is_hermitian(const ComplexMatrix& m, double relative_tolerance) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= relative_tolerance * scale;
}

}  // namespace macrodimer
