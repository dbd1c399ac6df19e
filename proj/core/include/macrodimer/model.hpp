#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "macrodimer/angular.hpp"
#include "macrodimer/config.hpp"

namespace macrodimer {

using Vec3 = Eigen::Vector3d;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct Geometry {
  std::vector<Vec3> positions;  // um

  std::size_t size() const { return positions.size(); }
  /// Throws SingularGeometry when two atoms coincide.
  void validate() const;

  static Geometry pair_on_axis(double separation, const Vec3& axis = Vec3::UnitZ(),
                               const Vec3& center = Vec3::Zero());
};

/// Ordered many-atom basis. States are ordered lexicographically over the
/// per-atom single-atom indices with atom 0 most significant, i.e. atom-major,
/// level-major, jz ascending.
class ProductBasis {
 public:
  ProductBasis(int n_atoms, std::optional<int> p_excitations, std::vector<int> flat_states);

  int n_atoms() const { return n_atoms_; }
  /// Empty for the unrestricted basis.
  std::optional<int> p_excitations() const { return p_excitations_; }
  int dimension() const { return dimension_; }

  /// Single-atom indices (into single_atom_states()) of basis state i.
  std::span<const int> state(int i) const {
    return {flat_.data() + static_cast<std::ptrdiff_t>(i) * n_atoms_, static_cast<std::size_t>(n_atoms_)};
  }
  const SingleAtomState& atom_state(int i, int atom) const;
  /// Index of a state given per-atom indices, or -1 if not in the basis.
  int index_of(std::span<const int> atoms) const;
  /// Twice the total jz of basis state i.
  int total_twice_jz(int i) const;

  /// Sub-basis with fixed total jz (twice the value).
  ProductBasis with_total_jz(int total_twice_jz) const;
  /// Distinct total-jz values (twice) present, ascending.
  std::vector<int> total_jz_sectors() const;

 private:
  int n_atoms_;
  std::optional<int> p_excitations_;
  int dimension_;
  std::vector<int> flat_;
  std::unordered_map<std::uint64_t, int> lookup_;
};

/// Basis with exactly `p_excitations` atoms in an np level.
ProductBasis build_basis(int n_atoms, int p_excitations);
/// All 8^n product states (no excitation-number restriction).
ProductBasis build_full_basis(int n_atoms);

struct OperatorMatrix {
  std::shared_ptr<const ProductBasis> basis;
  ComplexMatrix entries;  // rad/us

  int dimension() const { return static_cast<int>(entries.rows()); }
};

/// u(R_i) = alpha * (direction . R_i) on the ns states of each atom.
struct AppliedField {
  double alpha = 0.0;  // rad/us per um
  Vec3 direction = Vec3::UnitZ();
};

/// Holds the basis together with precomputed per-pair dipole products so that
/// Hamiltonians for many geometries can be assembled cheaply. Immutable after
/// construction and safe to share between threads.
class InteractionModel {
 public:
  InteractionModel(PhysicalConfig config, ProductBasis basis);

  const PhysicalConfig& config() const { return config_; }
  const ProductBasis& basis() const { return *basis_; }
  std::shared_ptr<const ProductBasis> basis_ptr() const { return basis_; }
  int dimension() const { return basis_->dimension(); }

  /// Diagonal of H_1 + ... + H_n with the sector constant n_p * omega0 removed:
  /// np3/2 -> 0, np1/2 -> Delta, ns -> 0.
  const Eigen::VectorXd& internal_diagonal() const { return internal_; }
  ComplexMatrix internal() const;
  ComplexMatrix dipole_dipole(const Geometry& geometry) const;
  Eigen::VectorXd applied_diagonal(const Geometry& geometry, const AppliedField& field) const;
  /// internal + dipole_dipole (+ applied shift when given).
  ComplexMatrix hamiltonian(const Geometry& geometry, const AppliedField* field = nullptr) const;

  /// Diagonal 0/1 mask of basis states where `atom` is in ns.
  const Eigen::VectorXd& ns_mask(int atom) const { return ns_mask_[static_cast<std::size_t>(atom)]; }
  double ns_population(const ComplexVector& psi, int atom) const;

  /// Per-atom gradient of <psi|V_dd|psi> with respect to the atom positions
  /// (rad/us per um), evaluated analytically from the 1/R^3 form.
  std::vector<Vec3> dipole_dipole_gradient(const Geometry& geometry, const ComplexVector& psi) const;

  /// Total J_z as a diagonal.
  Eigen::VectorXd total_jz() const;

 private:
  struct Entry {
    int row = 0;
    int col = 0;
    std::complex<double> value;
  };
  struct PairTable {
    int i = 0;
    int j = 0;
    // nonzero entries of d_b^(i) d_c^(j), index 3*b + c
    std::array<std::vector<Entry>, 9> terms;
  };

  // Q_bc = C3 (delta_bc / R^3 - 3 R_b R_c / R^5)
  Eigen::Matrix3d coupling_tensor(const Vec3& r) const;

  PhysicalConfig config_;
  std::shared_ptr<const ProductBasis> basis_;
  Eigen::VectorXd internal_;
  std::vector<Eigen::VectorXd> ns_mask_;
  std::vector<PairTable> pairs_;
};

OperatorMatrix internal_hamiltonian(const ProductBasis& basis, const PhysicalConfig& config);
/// Dipole-dipole coupling restricted to the basis (the excitation-conserving
/// block when the basis is a fixed-excitation sector).
OperatorMatrix dipole_dipole(const ProductBasis& basis, const Geometry& geometry,
                             const PhysicalConfig& config);

bool is_hermitian(const ComplexMatrix& m, double relative_tolerance = 1e-10);

}  // namespace macrodimer
