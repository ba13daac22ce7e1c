#pragma once
// Gaussian elimination and dense univariate polynomials, generic over the scalar.

#include "sphereflow/scalar.hpp"

#include <cmath>
#include <type_traits>
#include <vector>

namespace sphereflow {

template <class S>
inline bool negligible(const S& x, double tol) {
  if constexpr (is_exact_v<S>) {
    (void)tol;
    return is_zero(x);
  } else {
    return std::fabs(x) <= tol;
  }
}

template <class S>
struct LinearSolution {
  bool consistent = false;
  int rank = 0;
  std::vector<S> x;                      // particular solution, free variables zero
  std::vector<std::vector<S>> nullspace;  // basis of the kernel of A
};

/// Solve A x = b (A is rows x cols). Exact for exact S, partial pivoting for double.
template <class S>
LinearSolution<S> solve_linear(std::vector<std::vector<S>> A, std::vector<S> b, double tol = 1e-11) {
  const std::size_t rows = A.size();
  const std::size_t cols = rows ? A[0].size() : 0;
  if (b.empty()) b.assign(rows, S(0));
  double scale = 1.0;
  if constexpr (!is_exact_v<S>) {
    scale = 0.0;
    for (auto& r : A)
      for (auto& v : r) scale = std::max(scale, std::fabs(v));
    if (scale == 0.0) scale = 1.0;
  }
  std::vector<int> pivcol;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = rows;
    if constexpr (is_exact_v<S>) {
      for (std::size_t i = r; i < rows; ++i)
        if (!is_zero(A[i][c])) {
          piv = i;
          break;
        }
    } else {
      double best = tol * scale;
      for (std::size_t i = r; i < rows; ++i)
        if (std::fabs(A[i][c]) > best) {
          best = std::fabs(A[i][c]);
          piv = i;
        }
    }
    if (piv == rows) continue;
    std::swap(A[piv], A[r]);
    std::swap(b[piv], b[r]);
    S inv = S(1) / A[r][c];
    for (std::size_t j = c; j < cols; ++j) A[r][j] *= inv;
    b[r] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || negligible(A[i][c], 0.0)) continue;
      S f = A[i][c];
      for (std::size_t j = c; j < cols; ++j) A[i][j] -= f * A[r][j];
      b[i] -= f * b[r];
    }
    pivcol.push_back(static_cast<int>(c));
    ++r;
  }
  LinearSolution<S> out;
  out.rank = static_cast<int>(r);
  out.consistent = true;
  double bscale = scale;
  for (std::size_t i = r; i < rows; ++i)
    if (!negligible(b[i], tol * bscale)) out.consistent = false;
  out.x.assign(cols, S(0));
  for (std::size_t i = 0; i < r; ++i) out.x[pivcol[i]] = b[i];
  std::vector<bool> is_piv(cols, false);
  for (int c : pivcol) is_piv[c] = true;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_piv[f]) continue;
    std::vector<S> v(cols, S(0));
    v[f] = S(1);
    for (std::size_t i = 0; i < r; ++i) v[pivcol[i]] = -A[i][f];
    out.nullspace.push_back(std::move(v));
  }
  return out;
}

/// Dense univariate polynomial, coefficients from the constant term up.
template <class S>
struct UPoly {
  std::vector<S> c;

  UPoly() = default;
  explicit UPoly(std::vector<S> coeffs) : c(std::move(coeffs)) { trim(); }

  void trim(double tol = 0.0) {
    while (!c.empty() && negligible(c.back(), tol)) c.pop_back();
  }
  int degree() const { return static_cast<int>(c.size()) - 1; }
  bool is_zero() const { return c.empty(); }
  const S& lead() const { return c.back(); }

  template <class T>
  T eval(const T& x) const {
    T acc = T(0);
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + scalar_cast<T>(*it);
    return acc;
  }
  UPoly derivative() const {
    UPoly d;
    for (std::size_t i = 1; i < c.size(); ++i) d.c.push_back(c[i] * S(static_cast<int>(i)));
    d.trim();
    return d;
  }
};

template <class S>
UPoly<S> operator*(const UPoly<S>& a, const UPoly<S>& b) {
  if (a.is_zero() || b.is_zero()) return UPoly<S>();
  std::vector<S> out(a.c.size() + b.c.size() - 1, S(0));
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < b.c.size(); ++j) out[i + j] += a.c[i] * b.c[j];
  return UPoly<S>(out);
}

/// Polynomial remainder a mod b over a field.
template <class S>
UPoly<S> poly_rem(UPoly<S> a, const UPoly<S>& b, std::type_identity_t<UPoly<S>>* quot = nullptr, double tol = 0.0) {
  std::vector<S> q(a.c.size() > b.c.size() ? a.c.size() - b.c.size() + 1 : 1, S(0));
  while (!a.is_zero() && a.degree() >= b.degree()) {
    int shift = a.degree() - b.degree();
    S f = a.lead() / b.lead();
    q[shift] = f;
    for (int i = 0; i <= b.degree(); ++i) a.c[i + shift] -= f * b.c[i];
    a.c.pop_back();
    a.trim(tol);
  }
  if (quot) *quot = UPoly<S>(q);
  return a;
}

template <class S>
UPoly<S> poly_gcd(UPoly<S> a, UPoly<S> b, double tol = 0.0) {
  while (!b.is_zero()) {
    UPoly<S> r = poly_rem(a, b, nullptr, tol);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

/// Number of distinct real roots (Sturm). Exact for exact S.
template <class S>
int count_real_roots(const UPoly<S>& p, double tol = 0.0) {
  if (p.degree() <= 0) return 0;
  std::vector<UPoly<S>> seq{p, p.derivative()};
  while (!seq.back().is_zero()) {
    UPoly<S> r = poly_rem(seq[seq.size() - 2], seq.back(), nullptr, tol);
    for (auto& v : r.c) v = -v;
    if (r.is_zero()) break;
    seq.push_back(r);
  }
  auto changes = [&](bool at_plus) {
    int count = 0, prev = 0;
    for (const auto& q : seq) {
      if (q.is_zero()) continue;
      int s = sgn(q.lead());
      if (!at_plus && (q.degree() % 2 == 1)) s = -s;
      if (s == 0) continue;
      if (prev != 0 && s != prev) ++count;
      prev = s;
    }
    return count;
  };
  return changes(false) - changes(true);
}

}  // namespace sphereflow
