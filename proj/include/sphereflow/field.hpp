#pragma once
// Homogeneous polynomial vector fields tangent to the unit sphere.

#include "sphereflow/errors.hpp"
#include "sphereflow/poly.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>

namespace sphereflow {

template <class S>
using Vec3 = Eigen::Matrix<S, 3, 1>;
template <class S>
using Mat3 = Eigen::Matrix<S, 3, 3>;

template <class S>
struct HomVectorField {
  std::array<Poly3<S>, 3> c;  // P, Q, R

  const Poly3<S>& P() const { return c[0]; }
  const Poly3<S>& Q() const { return c[1]; }
  const Poly3<S>& R() const { return c[2]; }

  /// Shared degree of the components; throws DegreeMismatch.
  int degree() const;

  template <class T>
  Vec3<T> eval(const Vec3<T>& p) const {
    std::array<T, 3> a{p(0), p(1), p(2)};
    return Vec3<T>(c[0].eval(a), c[1].eval(a), c[2].eval(a));
  }

  HomVectorField<double> to_double() const {
    return {{c[0].to_double_poly(), c[1].to_double_poly(), c[2].to_double_poly()}};
  }

  friend bool operator==(const HomVectorField& a, const HomVectorField& b) { return a.c == b.c; }
};

/// The eight coefficients of the degree-two normal form, a[0] = a1.
template <class S>
struct QuadCoeffs {
  std::array<S, 8> a{};

  QuadCoeffs() { a.fill(S(0)); }
  explicit QuadCoeffs(const std::array<S, 8>& v) : a(v) {}
  const S& operator()(int k) const { return a[k - 1]; }
  S& operator()(int k) { return a[k - 1]; }
  friend bool operator==(const QuadCoeffs& x, const QuadCoeffs& y) { return x.a == y.a; }

  QuadCoeffs<double> to_double() const {
    QuadCoeffs<double> out;
    for (int i = 0; i < 8; ++i) out.a[i] = sphereflow::to_double(a[i]);
    return out;
  }
};

/// Convenience constructor from integers or rationals given a1..a8.
QuadCoeffs<QuadSurd> quad(std::initializer_list<QuadSurd> a);

/// ax + by + cz + d = 0
template <class S>
struct Plane {
  S a{0}, b{0}, c{0}, d{0};
  Poly3<S> poly() const {
    return px<S>() * a + py<S>() * b + pz<S>() * c + Poly3<S>(d);
  }
};

template <class S>
struct CofactorResult {
  bool invariant = false;
  Poly3<S> K;           // cofactor, degree <= n-1
  Poly3<S> multiplier;  // coefficient of the sphere polynomial
  bool transversal = false;
};

template <class S>
struct SouthPoleMove {
  HomVectorField<S> field;
  Mat3<S> rotation;  // x = rotation * x_new, rotation^T p = (0,0,-1)
  std::string frame;  // "identity", "gram-schmidt" or "householder"
};

/// X f = P f_x + Q f_y + R f_z
template <class S>
Poly3<S> derive_along(const HomVectorField<S>& X, const Poly3<S>& f);

template <class S>
bool is_tangent(const HomVectorField<S>& X);

template <class S>
HomVectorField<S> expand_quad(const QuadCoeffs<S>& q);

template <class S>
QuadCoeffs<S> to_quad_normal_form(const HomVectorField<S>& X);

template <class S>
bool is_orthogonal(const Mat3<S>& O, double tol = 1e-12);

/// The conjugated field O^{-1} X(O y).
template <class S>
HomVectorField<S> rotate(const HomVectorField<S>& X, const Mat3<S>& O);

template <class S>
SouthPoleMove<S> move_singularity_to_south_pole(const HomVectorField<S>& X, const Vec3<S>& p,
                                                double tol = 1e-9);

template <class S>
CofactorResult<S> invariant_plane_cofactor(const HomVectorField<S>& X, const Plane<S>& f);

/// True when X(num/den) vanishes on the sphere.
template <class S>
bool first_integral_check(const HomVectorField<S>& X, const Poly3<S>& num,
                          const Poly3<S>& den = Poly3<S>(S(1)));

/// Rational rotation from a rational skew vector via the Cayley transform.
Mat3<QuadSurd> cayley_rotation(const Rational& p, const Rational& q, const Rational& r);

extern template struct HomVectorField<QuadSurd>;
extern template struct HomVectorField<double>;

}  // namespace sphereflow
