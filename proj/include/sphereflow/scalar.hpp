#pragma once
// Exact scalars: GMP rationals and the quadratic surd a + b*sqrt(d).

#include <boost/multiprecision/gmp.hpp>
#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace sphereflow {

using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

/// Raised when two surds with different radicands meet.
struct MixedRadicand : std::domain_error {
  using std::domain_error::domain_error;
};

/// Raised when a result leaves the quadratic field of its inputs.
struct NotRepresentable : std::domain_error {
  using std::domain_error::domain_error;
};

/// Parse "p", "p/q", "-1.25" or "1e-3" into an exact rational.
Rational parse_rational(const std::string& s);

/// Split a positive integer as s^2 * d with d squarefree.
/// Throws NotRepresentable when d cannot be certified squarefree.
void squarefree_split(const Integer& m, Integer& s, Integer& d);

class QuadSurd {
 public:
  QuadSurd() = default;
  QuadSurd(int v) : a_(v) {}
  QuadSurd(long v) : a_(v) {}
  QuadSurd(long long v) : a_(v) {}
  QuadSurd(const Rational& r) : a_(r) {}
  /// a + b*sqrt(d); d is reduced to its squarefree part.
  QuadSurd(const Rational& a, const Rational& b, long long d);

  /// Exact square root of a nonnegative rational.
  static QuadSurd sqrt_of(const Rational& r);

  const Rational& rational_part() const { return a_; }
  const Rational& surd_part() const { return b_; }
  long long radicand() const { return d_; }

  bool is_rational() const { return d_ == 0; }
  bool is_zero() const { return d_ == 0 && a_ == 0; }
  int sign() const;
  double to_double() const;
  std::string str() const;

  /// Galois conjugate a - b*sqrt(d).
  QuadSurd conj() const;
  /// Field norm a^2 - b^2 d.
  Rational norm() const { return a_ * a_ - b_ * b_ * Rational(d_); }
  /// Exact square root inside the same field (denesting); throws NotRepresentable.
  QuadSurd sqrt() const;
  QuadSurd inverse() const;

  QuadSurd& operator+=(const QuadSurd& o);
  QuadSurd& operator-=(const QuadSurd& o);
  QuadSurd& operator*=(const QuadSurd& o);
  QuadSurd& operator/=(const QuadSurd& o) { return *this *= o.inverse(); }
  QuadSurd operator-() const;

  friend QuadSurd operator+(QuadSurd x, const QuadSurd& y) { return x += y; }
  friend QuadSurd operator-(QuadSurd x, const QuadSurd& y) { return x -= y; }
  friend QuadSurd operator*(QuadSurd x, const QuadSurd& y) { return x *= y; }
  friend QuadSurd operator/(QuadSurd x, const QuadSurd& y) { return x /= y; }
  friend bool operator==(const QuadSurd& x, const QuadSurd& y) {
    return x.a_ == y.a_ && x.b_ == y.b_ && x.d_ == y.d_;
  }
  friend bool operator!=(const QuadSurd& x, const QuadSurd& y) { return !(x == y); }
  friend bool operator<(const QuadSurd& x, const QuadSurd& y) { return (x - y).sign() < 0; }
  friend bool operator>(const QuadSurd& x, const QuadSurd& y) { return (x - y).sign() > 0; }
  friend bool operator<=(const QuadSurd& x, const QuadSurd& y) { return (x - y).sign() <= 0; }
  friend bool operator>=(const QuadSurd& x, const QuadSurd& y) { return (x - y).sign() >= 0; }

 private:
  void normalize();
  long long common_radicand(const QuadSurd& o) const;

  Rational a_{0};
  Rational b_{0};
  long long d_ = 0;  // 0 when rational, else squarefree > 1
};

std::ostream& operator<<(std::ostream& os, const QuadSurd& x);

// Uniform helpers over the two scalar kinds.
inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const QuadSurd& x) { return x.is_zero(); }
inline int sgn(double x) { return (x > 0) - (x < 0); }
inline int sgn(const QuadSurd& x) { return x.sign(); }
inline double to_double(double x) { return x; }
inline double to_double(const QuadSurd& x) { return x.to_double(); }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }
inline double sqrt_scalar(double x) { return std::sqrt(x); }
inline QuadSurd sqrt_scalar(const QuadSurd& x) { return x.sqrt(); }
inline double abs_scalar(double x) { return std::fabs(x); }
inline QuadSurd abs_scalar(const QuadSurd& x) { return x.sign() < 0 ? -x : x; }

template <class T>
inline T scalar_cast(const QuadSurd& x);
template <>
inline QuadSurd scalar_cast<QuadSurd>(const QuadSurd& x) { return x; }
template <>
inline double scalar_cast<double>(const QuadSurd& x) { return x.to_double(); }
template <class T>
inline T scalar_cast(double x) { return T(x); }

/// True when the scalar type decides signs exactly.
template <class S>
inline constexpr bool is_exact_v = !std::is_floating_point_v<S>;

}  // namespace sphereflow

namespace Eigen {
template <>
struct NumTraits<sphereflow::QuadSurd> : GenericNumTraits<sphereflow::QuadSurd> {
  using Real = sphereflow::QuadSurd;
  using NonInteger = sphereflow::QuadSurd;
  using Nested = sphereflow::QuadSurd;
  using Literal = sphereflow::QuadSurd;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 10,
    AddCost = 50,
    MulCost = 100
  };
  static inline Real epsilon() { return Real(0); }
  static inline Real dummy_precision() { return Real(0); }
  static inline int digits10() { return 0; }
  static inline Real highest() { return Real(0); }
  static inline Real lowest() { return Real(0); }
};
}  // namespace Eigen
