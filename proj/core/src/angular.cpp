#include "macrodimer/angular.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <mutex>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "macrodimer/error.hpp"

namespace macrodimer {

namespace mp = boost::multiprecision;
using BigInt = mp::cpp_int;
using Rational = mp::cpp_rational;

HalfInt HalfInt::from_double(double value) {
  const double twice = 2.0 * value;
  const double rounded = std::round(twice);
  if (!std::isfinite(value) || std::abs(twice - rounded) > 1e-9 || std::abs(rounded) > 1e6) {
    throw InvalidArgument("not a half-integer: " + std::to_string(value));
  }
  return HalfInt{static_cast<int>(rounded)};
}

int orbital_l(Level level) { return level == Level::nS ? 0 : 1; }

HalfInt total_j(Level level) { return level == Level::nP32 ? HalfInt{3} : HalfInt{1}; }

std::string level_name(Level level) {
  switch (level) {
    case Level::nS: return "nS1/2";
    case Level::nP12: return "nP1/2";
    case Level::nP32: return "nP3/2";
  }
  return "?";
}

bool SingleAtomState::valid() const {
  const int j2 = total_j(level).twice;
  return std::abs(jz.twice) <= j2 && ((jz.twice - j2) % 2 == 0);
}

const std::array<SingleAtomState, 8>& single_atom_states() {
  static const std::array<SingleAtomState, 8> states = {{
      {Level::nS, {-1}},   {Level::nS, {1}},   {Level::nP12, {-1}}, {Level::nP12, {1}},
      {Level::nP32, {-3}}, {Level::nP32, {-1}}, {Level::nP32, {1}}, {Level::nP32, {3}},
  }};
  return states;
}

int single_atom_index(const SingleAtomState& state) {
  const auto& all = single_atom_states();
  const auto it = std::find(all.begin(), all.end(), state);
  if (it == all.end()) throw InvalidArgument("invalid single-atom state");
  return static_cast<int>(it - all.begin());
}

double ReducedDipole::d() const { return radial_element / std::sqrt(3.0); }

ReducedDipole ReducedDipole::for_principal(int n) {
  return ReducedDipole{static_cast<double>(n) * static_cast<double>(n)};
}

ReducedDipole ReducedDipole::unit() { return ReducedDipole{std::sqrt(3.0)}; }

namespace {

// Factorial table grown on demand; arguments are small for this problem but
// the sums stay exact for any size. A deque keeps earlier references valid
// while the table grows.
const BigInt& factorial(int n) {
  static std::mutex mutex;
  static std::deque<BigInt> table{BigInt(1)};
  std::lock_guard lock(mutex);
  while (static_cast<int>(table.size()) <= n) {
    table.push_back(table.back() * static_cast<int>(table.size()));
  }
  return table[static_cast<std::size_t>(n)];
}

// Factorial of a half-integer sum known to be a non-negative integer, given
// in doubled form.
const BigInt& factorial_twice(int twice) { return factorial(twice / 2); }

bool triangle(int a, int b, int c) {
  return c >= std::abs(a - b) && c <= a + b && ((a + b + c) % 2 == 0);
}

// Delta(abc)^2 = (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!
Rational triangle_coefficient(int a, int b, int c) {
  return Rational(factorial_twice(a + b - c) * factorial_twice(a - b + c) *
                      factorial_twice(-a + b + c),
                  factorial_twice(a + b + c + 2));
}

// sign(sum) * sqrt(sum^2 * prefactor) evaluated once in floating point.
double signed_root(const Rational& sum, const Rational& prefactor_squared) {
  if (sum == 0) return 0.0;
  const Rational squared = sum * sum * prefactor_squared;
  const double magnitude = std::sqrt(static_cast<double>(squared));
  return sum > 0 ? magnitude : -magnitude;
}

bool consistent(HalfInt j, HalfInt m) {
  return j.twice >= 0 && std::abs(m.twice) <= j.twice && ((j.twice - m.twice) % 2 == 0);
}

}  // namespace

double wigner_3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3) {
  if (j1.twice < 0 || j2.twice < 0 || j3.twice < 0) {
    throw InvalidArgument("negative angular momentum in 3j symbol");
  }
  if (((j1.twice - m1.twice) % 2 != 0) || ((j2.twice - m2.twice) % 2 != 0) ||
      ((j3.twice - m3.twice) % 2 != 0)) {
    throw InvalidArgument("j and m of mixed integer/half-integer type in 3j symbol");
  }
  if (m1.twice + m2.twice + m3.twice != 0) return 0.0;
  if (!triangle(j1.twice, j2.twice, j3.twice)) return 0.0;
  if (!consistent(j1, m1) || !consistent(j2, m2) || !consistent(j3, m3)) return 0.0;

  const int a = j1.twice, b = j2.twice, c = j3.twice;
  // Summation limits (doubled quantities).
  const int k_min = std::max({0, b - c - m1.twice, a - c + m2.twice});
  const int k_max = std::min({a + b - c, a - m1.twice, b + m2.twice});

  Rational sum = 0;
  for (int k = k_min; k <= k_max; k += 2) {
    const BigInt denominator = factorial_twice(k) * factorial_twice(c - b + k + m1.twice) *
                               factorial_twice(c - a + k - m2.twice) *
                               factorial_twice(a + b - c - k) * factorial_twice(a - k - m1.twice) *
                               factorial_twice(b - k + m2.twice);
    const Rational term(BigInt(1), denominator);
    if ((k / 2) % 2 == 0) {
      sum += term;
    } else {
      sum -= term;
    }
  }

  Rational prefactor = triangle_coefficient(a, b, c);
  prefactor *= Rational(factorial_twice(a + m1.twice) * factorial_twice(a - m1.twice) *
                        factorial_twice(b + m2.twice) * factorial_twice(b - m2.twice) *
                        factorial_twice(c + m3.twice) * factorial_twice(c - m3.twice));

  const int phase_twice = a - b - m3.twice;  // (-1)^(j1 - j2 - m3)
  const double value = signed_root(sum, prefactor);
  return ((phase_twice / 2) % 2 == 0) ? value : -value;
}

double wigner_6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6) {
  for (HalfInt j : {j1, j2, j3, j4, j5, j6}) {
    if (j.twice < 0) throw InvalidArgument("negative angular momentum in 6j symbol");
  }
  const int a = j1.twice, b = j2.twice, c = j3.twice, d = j4.twice, e = j5.twice, f = j6.twice;
  if (!triangle(a, b, c) || !triangle(a, e, f) || !triangle(d, b, f) || !triangle(d, e, c)) {
    return 0.0;
  }

  const int a1 = a + b + c, a2 = a + e + f, a3 = d + b + f, a4 = d + e + c;
  const int b1 = a + b + d + e, b2 = b + c + e + f, b3 = c + a + f + d;
  const int t_min = std::max({a1, a2, a3, a4});
  const int t_max = std::min({b1, b2, b3});

  Rational sum = 0;
  for (int t = t_min; t <= t_max; t += 2) {
    const BigInt denominator = factorial_twice(t - a1) * factorial_twice(t - a2) *
                               factorial_twice(t - a3) * factorial_twice(t - a4) *
                               factorial_twice(b1 - t) * factorial_twice(b2 - t) *
                               factorial_twice(b3 - t);
    const Rational term(factorial_twice(t + 2), denominator);
    if ((t / 2) % 2 == 0) {
      sum += term;
    } else {
      sum -= term;
    }
  }

  const Rational prefactor = triangle_coefficient(a, b, c) * triangle_coefficient(a, e, f) *
                             triangle_coefficient(d, b, f) * triangle_coefficient(d, e, c);
  return signed_root(sum, prefactor);
}

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt j, HalfInt m) {
  // <j1 m1 j2 m2|J M> = (-1)^(j1-j2+M) sqrt(2J+1) (j1 j2 J; m1 m2 -M)
  const double three_j = wigner_3j(j1, j2, j, m1, m2, HalfInt{-m.twice});
  const int phase_twice = j1.twice - j2.twice + m.twice;
  const double value = std::sqrt(static_cast<double>(j.twice + 1)) * three_j;
  return ((phase_twice / 2) % 2 == 0) ? value : -value;
}

double wigner_symbol(SymbolKind kind, const std::array<double, 6>& args) {
  std::array<HalfInt, 6> h{};
  for (std::size_t i = 0; i < 6; ++i) h[i] = HalfInt::from_double(args[i]);
  if (kind == SymbolKind::three_j) return wigner_3j(h[0], h[1], h[2], h[3], h[4], h[5]);
  return wigner_6j(h[0], h[1], h[2], h[3], h[4], h[5]);
}

namespace {

// <l' || d || l> in units of e<r>.
double orbital_reduced(int l_bra, int l_ket) {
  const double three_j =
      wigner_3j(HalfInt{2 * l_bra}, HalfInt{2}, HalfInt{2 * l_ket}, HalfInt{0}, HalfInt{0}, HalfInt{0});
  const double sign = (l_bra % 2 == 0) ? 1.0 : -1.0;
  return sign * std::sqrt(static_cast<double>((2 * l_bra + 1) * (2 * l_ket + 1))) * three_j;
}

// <l' s j' || d || l s j>, spin s = 1/2, in units of e<r>.
double fine_structure_reduced(int l_bra, HalfInt j_bra, int l_ket, HalfInt j_ket) {
  const HalfInt s{1};
  const double six_j = wigner_6j(HalfInt{2 * l_bra}, j_bra, s, j_ket, HalfInt{2 * l_ket}, HalfInt{2});
  // (-1)^(l' + s + j + 1)
  const int phase_twice = 2 * l_bra + s.twice + j_ket.twice + 2;
  const double sign = ((phase_twice / 2) % 2 == 0) ? 1.0 : -1.0;
  return sign * std::sqrt(static_cast<double>((j_bra.twice + 1) * (j_ket.twice + 1))) * six_j *
         orbital_reduced(l_bra, l_ket);
}

}  // namespace

std::complex<double> dipole_component(const SingleAtomState& bra, const SingleAtomState& ket,
                                      int q, const ReducedDipole& dipole) {
  if (!bra.valid() || !ket.valid()) throw InvalidArgument("invalid single-atom state");
  if (q < -1 || q > 1) throw InvalidArgument("spherical component q must be -1, 0 or +1");
  const int l_bra = orbital_l(bra.level);
  const int l_ket = orbital_l(ket.level);
  if (std::abs(l_bra - l_ket) != 1) return 0.0;
  if (bra.jz.twice != ket.jz.twice + 2 * q) return 0.0;

  const HalfInt j_bra = total_j(bra.level);
  const HalfInt j_ket = total_j(ket.level);
  // Wigner-Eckart: (-1)^(j'-m') (j' 1 j; -m' q m) <j'||d||j>
  const double three_j =
      wigner_3j(j_bra, HalfInt{2}, j_ket, HalfInt{-bra.jz.twice}, HalfInt{2 * q}, ket.jz);
  const int phase_twice = j_bra.twice - bra.jz.twice;
  const double sign = ((phase_twice / 2) % 2 == 0) ? 1.0 : -1.0;
  const double radial = dipole.radial_element;  // e<r> in e*a0
  return sign * three_j * fine_structure_reduced(l_bra, j_bra, l_ket, j_ket) * radial;
}

Matrix8c spherical_dipole_matrix(int q, const ReducedDipole& dipole) {
  const auto& states = single_atom_states();
  Matrix8c m = Matrix8c::Zero();
  for (int a = 0; a < kSingleAtomDim; ++a) {
    for (int b = 0; b < kSingleAtomDim; ++b) {
      m(a, b) = dipole_component(states[static_cast<std::size_t>(a)],
                                 states[static_cast<std::size_t>(b)], q, dipole);
    }
  }
  return m;
}

CartesianDipoles cartesian_dipole_set(const ReducedDipole& dipole) {
  const Matrix8c dm = spherical_dipole_matrix(-1, dipole);
  const Matrix8c d0 = spherical_dipole_matrix(0, dipole);
  const Matrix8c dp = spherical_dipole_matrix(1, dipole);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const std::complex<double> i(0.0, 1.0);
  return CartesianDipoles{(dm - dp) * inv_sqrt2, i * (dm + dp) * inv_sqrt2, d0};
}

Matrix8c jz_operator() {
  Matrix8c m = Matrix8c::Zero();
  const auto& states = single_atom_states();
  for (int a = 0; a < kSingleAtomDim; ++a) m(a, a) = states[static_cast<std::size_t>(a)].jz.value();
  return m;
}

}  // namespace macrodimer
