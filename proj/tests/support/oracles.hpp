#pragma once

// Independent reference computations for tests. Nothing here calls into the
// library's solvers.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Effective tensor T_ik = sum_e c_e int_e (delta_ik - d_i N^k) on a periodic
/// n x n grid of bilinear elements with per-element coefficients `coef`
/// (row-major, element (i, j) at i + n j). Solved with a direct factorization,
/// one node pinned per connected component.
Eigen::Matrix2d periodic_q1_tensor(int n, const std::vector<double>& coef);

/// Centred square solid inclusion of side `side` on an n x n voxel grid:
/// coefficient `pore` outside, `solid` inside.
std::vector<double> inclusion_coefficients(int n, double side, double pore, double solid);

/// Forward-mode dual number; nest it for second derivatives.
template <class T>
struct Dual {
  T v{};
  T d{};
  Dual() = default;
  Dual(double x) : v(x), d(0) {}
  Dual(T value, T deriv) : v(value), d(deriv) {}
};

template <class T> Dual<T> operator+(Dual<T> a, Dual<T> b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator-(Dual<T> a, Dual<T> b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator*(Dual<T> a, Dual<T> b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T> Dual<T> operator*(double s, Dual<T> a) { return {s * a.v, s * a.d}; }
template <class T> Dual<T> operator+(double s, Dual<T> a) { return {s + a.v, a.d}; }

inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
template <class T> Dual<T> sin(Dual<T> a) { return {sin(a.v), cos(a.v) * a.d}; }
template <class T> Dual<T> cos(Dual<T> a) { return {cos(a.v), -1.0 * (sin(a.v) * a.d)}; }

using D2 = Dual<Dual<double>>;

/// Seeds x for a second derivative along one axis.
inline D2 seed(double x) { return D2(Dual<double>(x, 1.0), Dual<double>(1.0, 0.0)); }
inline D2 constant(double x) { return D2(Dual<double>(x, 0.0), Dual<double>(0.0, 0.0)); }

}  // namespace oracle
