#pragma once
// Sparse multivariate polynomials over an exact or floating scalar.

#include "sphereflow/scalar.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace sphereflow {

template <class S, int N>
class Poly {
 public:
  using Exp = std::array<int, N>;
  using Terms = std::map<Exp, S>;
  using scalar_type = S;
  static constexpr int nvars = N;

  Poly() = default;
  Poly(const S& c) {
    if (!sphereflow::is_zero(c)) terms_[Exp{}] = c;
  }
  Poly(int c) : Poly(S(c)) {}

  static Poly var(int i, const S& c = S(1)) {
    Exp e{};
    e[i] = 1;
    return monomial(e, c);
  }
  static Poly monomial(const Exp& e, const S& c) {
    Poly p;
    p.add_term(e, c);
    return p;
  }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Total degree; -1 for the zero polynomial.
  int degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, total(e));
    return d;
  }
  int degree_in(int i) const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, e[i]);
    return d;
  }
  int min_degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = d < 0 ? total(e) : std::min(d, total(e));
    return d;
  }
  bool is_homogeneous() const {
    if (terms_.empty()) return true;
    int d = total(terms_.begin()->first);
    for (const auto& [e, c] : terms_)
      if (total(e) != d) return false;
    return true;
  }

  S coeff(const Exp& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? S(0) : it->second;
  }

  void add_term(const Exp& e, const S& c) {
    if (sphereflow::is_zero(c)) return;
    auto [it, fresh] = terms_.try_emplace(e, c);
    if (!fresh) {
      it->second += c;
      if (sphereflow::is_zero(it->second)) terms_.erase(it);
    }
  }

  Poly& operator+=(const Poly& o) {
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  Poly& operator*=(const S& s) {
    if (sphereflow::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }
  Poly operator-() const {
    Poly out = *this;
    for (auto& [e, c] : out.terms_) c = -c;
    return out;
  }

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, const S& s) { return a *= s; }
  friend Poly operator*(const S& s, Poly a) { return a *= s; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        Exp e;
        for (int i = 0; i < N; ++i) e[i] = ea[i] + eb[i];
        out.add_term(e, ca * cb);
      }
    return out;
  }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }
  friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  Poly pow(int k) const {
    Poly out(S(1));
    for (int i = 0; i < k; ++i) out *= *this;
    return out;
  }

  template <class T>
  T eval(const std::array<T, N>& x) const {
    int maxdeg = std::max(0, degree());
    std::vector<std::array<T, N>> pw(static_cast<std::size_t>(maxdeg) + 1);
    for (int i = 0; i < N; ++i) pw[0][i] = T(1);
    for (int k = 1; k <= maxdeg; ++k)
      for (int i = 0; i < N; ++i) pw[k][i] = pw[k - 1][i] * x[i];
    T acc = T(0);
    for (const auto& [e, c] : terms_) {
      T m = scalar_cast<T>(c);
      for (int i = 0; i < N; ++i) m = m * pw[e[i]][i];
      acc = acc + m;
    }
    return acc;
  }

  Poly derivative(int i) const {
    Poly out;
    for (const auto& [e, c] : terms_) {
      if (e[i] == 0) continue;
      Exp f = e;
      f[i] -= 1;
      out.add_term(f, c * S(e[i]));
    }
    return out;
  }

  Poly homogeneous_part(int k) const {
    Poly out;
    for (const auto& [e, c] : terms_)
      if (total(e) == k) out.terms_.emplace(e, c);
    return out;
  }

  /// Ring homomorphism sending variable i to images[i].
  template <int M>
  Poly<S, M> substitute(const std::array<Poly<S, M>, N>& images) const {
    std::array<std::vector<Poly<S, M>>, N> pw;
    for (int i = 0; i < N; ++i) {
      int d = std::max(0, degree_in(i));
      pw[i].reserve(static_cast<std::size_t>(d) + 1);
      pw[i].push_back(Poly<S, M>(S(1)));
      for (int k = 1; k <= d; ++k) pw[i].push_back(pw[i].back() * images[i]);
    }
    Poly<S, M> out;
    for (const auto& [e, c] : terms_) {
      Poly<S, M> m(c);
      for (int i = 0; i < N; ++i)
        if (e[i] > 0) m = m * pw[i][e[i]];
      out += m;
    }
    return out;
  }

  template <class T, class F>
  Poly<T, N> map_coeffs(F f) const {
    Poly<T, N> out;
    for (const auto& [e, c] : terms_) out.add_term(e, f(c));
    return out;
  }

  Poly<double, N> to_double_poly() const {
    return map_coeffs<double>([](const S& c) { return sphereflow::to_double(c); });
  }

  static int total(const Exp& e) {
    int t = 0;
    for (int v : e) t += v;
    return t;
  }

 private:
  Terms terms_;
};

template <class S>
using Poly3 = Poly<S, 3>;
template <class S>
using Poly2 = Poly<S, 2>;

template <class S>
inline Poly3<S> px() { return Poly3<S>::var(0); }
template <class S>
inline Poly3<S> py() { return Poly3<S>::var(1); }
template <class S>
inline Poly3<S> pz() { return Poly3<S>::var(2); }

/// x^2 + y^2 + z^2 - 1
template <class S>
inline Poly3<S> sphere_poly() {
  return px<S>() * px<S>() + py<S>() * py<S>() + pz<S>() * pz<S>() - Poly3<S>(S(1));
}

/// Human-readable form, terms in exponent order, e.g. "2*x*y^2 - 1/3*z".
template <class S, int N>
std::string poly_to_string(const Poly<S, N>& p, const std::array<const char*, N>& names) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [e, c] = *it;
    std::ostringstream cs;
    cs << c;
    std::string coef = cs.str();
    bool neg = sgn(c) < 0;
    if (neg) {
      std::ostringstream ns;
      ns << -c;
      coef = ns.str();
    }
    if (coef.find_first_of("+-", 1) != std::string::npos) coef = "(" + coef + ")";
    os << (first ? (neg ? "-" : "") : (neg ? " - " : " + "));
    first = false;
    bool unit = coef == "1";
    bool any = false;
    if (!unit) os << coef;
    for (int i = 0; i < N; ++i) {
      if (e[i] == 0) continue;
      os << ((any || !unit) ? "*" : "") << names[i];
      if (e[i] > 1) os << '^' << e[i];
      any = true;
    }
    if (unit && !any) os << "1";
  }
  return os.str();
}

template <class S>
struct SphereReduction {
  Poly3<S> multiplier;  // c
  Poly3<S> remainder;   // r, no monomial divisible by z^2
};

/// p = c*(x^2+y^2+z^2-1) + r using z^2 <- 1 - x^2 - y^2.
template <class S>
SphereReduction<S> reduce_mod_sphere(const Poly3<S>& p) {
  SphereReduction<S> out;
  out.remainder = p;
  const Poly3<S> tail = Poly3<S>(S(1)) - px<S>() * px<S>() - py<S>() * py<S>();
  for (;;) {
    const typename Poly3<S>::Exp* pick = nullptr;
    for (const auto& [e, c] : out.remainder.terms())
      if (e[2] >= 2 && (!pick || e[2] > (*pick)[2])) pick = &e;
    if (!pick) break;
    typename Poly3<S>::Exp e = *pick;
    S c = out.remainder.coeff(e);
    typename Poly3<S>::Exp lowered = e;
    lowered[2] -= 2;
    Poly3<S> m = Poly3<S>::monomial(lowered, c);
    out.remainder -= Poly3<S>::monomial(e, c);
    out.multiplier += m;
    out.remainder += m * tail;
  }
  return out;
}

template <class S>
bool vanishes_on_sphere(const Poly3<S>& p) {
  return reduce_mod_sphere(p).remainder.is_zero();
}

// The heavy instantiations live in src/poly.cpp.
extern template class Poly<QuadSurd, 3>;
extern template class Poly<QuadSurd, 2>;
extern template class Poly<double, 3>;
extern template class Poly<double, 2>;

}  // namespace sphereflow
