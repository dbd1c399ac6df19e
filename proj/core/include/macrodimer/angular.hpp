#pragma once

// Angular-momentum algebra for the {ns, np1/2, np3/2} fine-structure manifold.
//
// Reduced-element convention. The radial element <np|r|ns> (in a0) fixes the
// orbital reduced element <l=1||d||l=0> = e<np|r|ns>, so that a single
// spherical component of the orbital transition has magnitude
//
//     |<p, m_l = q| d_q |s>| = e<np|r|ns>/sqrt(3) = D .
//
// Spin is recoupled with a 6j symbol, which makes
// <np_j, m'| d_q |ns, m> = D * <1 q; 1/2 m | j m'> up to a phase. Summed over the
// six np states each q channel carries D^2 and the three channels together
// e^2<r>^2 = 3 D^2, independent of the ns projection.
//
// Matrix elements use the Condon-Shortley phase convention. Any diagonal
// rephasing of the single-atom basis leaves all energies and |overlaps|^2
// unchanged.

#include <array>
#include <complex>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

namespace macrodimer {

/// Half-integer stored as twice its value.
struct HalfInt {
  int twice = 0;

  static HalfInt from_double(double value);  // throws InvalidArgument for non half-integers
  constexpr double value() const { return 0.5 * twice; }
  friend constexpr bool operator==(HalfInt, HalfInt) = default;
};

enum class Level : std::uint8_t { nS, nP12, nP32 };

int orbital_l(Level level);
HalfInt total_j(Level level);
std::string level_name(Level level);

struct SingleAtomState {
  Level level = Level::nS;
  HalfInt jz{1};

  bool valid() const;
  friend bool operator==(const SingleAtomState&, const SingleAtomState&) = default;
};

/// The 8 single-atom states, level-major, jz ascending:
/// nS(-1/2, 1/2), nP12(-1/2, 1/2), nP32(-3/2 .. 3/2).
const std::array<SingleAtomState, 8>& single_atom_states();
inline constexpr int kSingleAtomDim = 8;
int single_atom_index(const SingleAtomState& state);

struct ReducedDipole {
  double radial_element = 0.0;  // <np|r|ns> in a0

  /// D = e<np|r|ns>/sqrt(3) in e*a0.
  double d() const;
  /// Default radial element n^2 a0.
  static ReducedDipole for_principal(int n);
  /// D = 1, i.e. matrix elements in units of D.
  static ReducedDipole unit();
};

enum class SymbolKind { three_j, six_j };

/// 3j symbol (j1 j2 j3; m1 m2 m3) by the Racah sum in exact rational arithmetic.
double wigner_3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3);
/// 6j symbol {j1 j2 j3; j4 j5 j6} by the Racah sum in exact rational arithmetic.
double wigner_6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6);
/// <j1 m1; j2 m2 | J M>.
double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt j, HalfInt m);

/// Generic entry point taking six (half-)integers as doubles. For 3j the
/// order is (j1, j2, j3, m1, m2, m3); for 6j it is the two rows.
double wigner_symbol(SymbolKind kind, const std::array<double, 6>& args);

/// <bra| d_q |ket> in units of e*a0.
std::complex<double> dipole_component(const SingleAtomState& bra, const SingleAtomState& ket,
                                      int q, const ReducedDipole& dipole);

using Matrix8c = Eigen::Matrix<std::complex<double>, 8, 8>;

struct CartesianDipoles {
  Matrix8c x;
  Matrix8c y;
  Matrix8c z;

  const Matrix8c& operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
};

/// Spherical component d_q (q = -1, 0, +1) as an 8x8 matrix.
Matrix8c spherical_dipole_matrix(int q, const ReducedDipole& dipole);

/// d_z = d_0, d_x = (d_-1 - d_+1)/sqrt2, d_y = i(d_-1 + d_+1)/sqrt2.
CartesianDipoles cartesian_dipole_set(const ReducedDipole& dipole);

/// Diagonal J_z on the single-atom space.
Matrix8c jz_operator();

}  // namespace macrodimer
