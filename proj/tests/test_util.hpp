#pragma once

#include "sphereflow/field.hpp"

#include <random>

namespace sftest {

using namespace sphereflow;
using Q = QuadSurd;

inline Rational rand_rational(std::mt19937& g, int span = 5, int maxden = 4) {
  std::uniform_int_distribution<int> num(-span, span), den(1, maxden);
  return Rational(num(g)) / den(g);
}

inline Rational rand_nonzero(std::mt19937& g, int span = 5, int maxden = 4) {
  Rational r;
  do r = rand_rational(g, span, maxden);
  while (r == 0);
  return r;
}

inline QuadCoeffs<Q> rand_quad(std::mt19937& g) {
  QuadCoeffs<Q> q;
  for (auto& v : q.a) v = Q(rand_rational(g));
  return q;
}

template <int N>
inline Poly<Q, N> rand_poly(std::mt19937& g, int maxdeg, int nterms) {
  std::uniform_int_distribution<int> d(0, maxdeg);
  Poly<Q, N> p;
  for (int t = 0; t < nterms; ++t) {
    typename Poly<Q, N>::Exp e{};
    int left = d(g);
    for (int i = 0; i < N; ++i) {
      std::uniform_int_distribution<int> k(0, left);
      e[i] = (i == N - 1) ? left : k(g);
      left -= e[i];
    }
    p.add_term(e, Q(rand_rational(g)));
  }
  return p;
}

/// Rational rotation from random Cayley parameters.
inline Mat3<Q> rand_rotation(std::mt19937& g) {
  return cayley_rotation(rand_rational(g, 3, 3), rand_rational(g, 3, 3), rand_rational(g, 3, 3));
}

inline Eigen::Vector3d rand_unit(std::mt19937& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v(n(g), n(g), n(g));
  return v.normalized();
}

/// Rational point on the unit sphere (inverse stereographic image of a rational point).
inline Vec3<Q> rand_rational_unit(std::mt19937& g) {
  Rational s = rand_rational(g, 4, 3), t = rand_rational(g, 4, 3);
  Rational den = 1 + s * s + t * t;
  return Vec3<Q>(Q(2 * s / den), Q(2 * t / den), Q((s * s + t * t - 1) / den));
}

}  // namespace sftest
