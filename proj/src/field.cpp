#include "sphereflow/field.hpp"

#include "sphereflow/linalg.hpp"

#include <cmath>

namespace sphereflow {

template <class S>
int HomVectorField<S>::degree() const {
  int d = -1;
  for (const auto& p : c) {
    if (p.is_zero()) continue;
    if (!p.is_homogeneous()) throw DegreeMismatch("component is not homogeneous");
    int k = p.degree();
    if (d >= 0 && k != d) throw DegreeMismatch("components have different degrees");
    d = k;
  }
  return d;
}

QuadCoeffs<QuadSurd> quad(std::initializer_list<QuadSurd> a) {
  if (a.size() != 8) throw std::invalid_argument("quad needs eight coefficients");
  QuadCoeffs<QuadSurd> q;
  std::copy(a.begin(), a.end(), q.a.begin());
  return q;
}

template <class S>
Poly3<S> derive_along(const HomVectorField<S>& X, const Poly3<S>& f) {
  return X.c[0] * f.derivative(0) + X.c[1] * f.derivative(1) + X.c[2] * f.derivative(2);
}

template <class S>
bool is_tangent(const HomVectorField<S>& X) {
  (void)X.degree();
  Poly3<S> t = px<S>() * X.c[0] + py<S>() * X.c[1] + pz<S>() * X.c[2];
  if constexpr (is_exact_v<S>) {
    return t.is_zero();
  } else {
    for (const auto& [e, v] : t.terms())
      if (std::fabs(v) > 1e-12) return false;
    return true;
  }
}

template <class S>
HomVectorField<S> expand_quad(const QuadCoeffs<S>& q) {
  auto m = [](int i, int j, int k, const S& c) { return Poly3<S>::monomial({i, j, k}, c); };
  HomVectorField<S> X;
  X.c[0] = m(1, 1, 0, q(1)) + m(0, 2, 0, q(2)) + m(0, 0, 2, q(3)) + m(1, 0, 1, q(4)) + m(0, 1, 1, q(5));
  X.c[1] = m(2, 0, 0, -q(1)) + m(1, 1, 0, -q(2)) + m(0, 0, 2, q(6)) + m(1, 0, 1, q(7)) + m(0, 1, 1, q(8));
  X.c[2] = m(1, 0, 1, -q(3)) + m(2, 0, 0, -q(4)) + m(1, 1, 0, -(q(5) + q(7))) + m(0, 1, 1, -q(6)) +
           m(0, 2, 0, -q(8));
  return X;
}

template <class S>
QuadCoeffs<S> to_quad_normal_form(const HomVectorField<S>& X) {
  if (X.degree() != 2) throw NotDegreeTwo("field is not of degree two");
  using E = typename Poly3<S>::Exp;
  const std::array<E, 5> p_allowed{E{1, 1, 0}, E{0, 2, 0}, E{0, 0, 2}, E{1, 0, 1}, E{0, 1, 1}};
  const std::array<E, 5> q_allowed{E{2, 0, 0}, E{1, 1, 0}, E{0, 0, 2}, E{1, 0, 1}, E{0, 1, 1}};
  auto within = [](const Poly3<S>& p, const std::array<E, 5>& allowed) {
    for (const auto& [e, v] : p.terms())
      if (std::find(allowed.begin(), allowed.end(), e) == allowed.end()) return false;
    return true;
  };
  if (!within(X.c[0], p_allowed) || !within(X.c[1], q_allowed))
    throw NotInNormalForm("a monomial outside the normal-form pattern");
  if (!is_tangent(X)) throw NotTangent("xP + yQ + zR is not identically zero");
  QuadCoeffs<S> q;
  q(1) = X.c[0].coeff({1, 1, 0});
  q(2) = X.c[0].coeff({0, 2, 0});
  q(3) = X.c[0].coeff({0, 0, 2});
  q(4) = X.c[0].coeff({1, 0, 1});
  q(5) = X.c[0].coeff({0, 1, 1});
  q(6) = X.c[1].coeff({0, 0, 2});
  q(7) = X.c[1].coeff({1, 0, 1});
  q(8) = X.c[1].coeff({0, 1, 1});
  return q;
}

template <class S>
bool is_orthogonal(const Mat3<S>& O, double tol) {
  Mat3<S> G = O.transpose() * O;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      S target = S(i == j ? 1 : 0);
      if (!negligible<S>(G(i, j) - target, tol)) return false;
    }
  return true;
}

template <class S>
HomVectorField<S> rotate(const HomVectorField<S>& X, const Mat3<S>& O) {
  if (!is_orthogonal(O)) throw NotOrthogonal("rotation matrix is not orthogonal");
  std::array<Poly3<S>, 3> images;
  for (int i = 0; i < 3; ++i)
    images[i] = px<S>() * O(i, 0) + py<S>() * O(i, 1) + pz<S>() * O(i, 2);
  std::array<Poly3<S>, 3> composed;
  for (int i = 0; i < 3; ++i) composed[i] = X.c[i].template substitute<3>(images);
  // O^{-1} = O^T
  HomVectorField<S> Y;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) Y.c[i] += composed[k] * O(k, i);
  if constexpr (!is_exact_v<S>) {
    for (auto& comp : Y.c) {
      Poly3<S> clean;
      for (const auto& [e, v] : comp.terms())
        if (std::fabs(v) > 1e-14) clean.add_term(e, v);
      comp = clean;
    }
  }
  return Y;
}

namespace {

template <class S>
Mat3<S> gram_schmidt_frame(const Vec3<S>& p) {
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return abs_scalar(p(i)) < abs_scalar(p(j));
  });
  Vec3<S> axis = Vec3<S>::Zero();
  axis(order[0]) = S(1);
  Vec3<S> e1 = axis - p * p(order[0]);
  S n2 = e1.dot(e1);
  e1 /= sqrt_scalar(n2);
  Vec3<S> e3 = -p;
  Vec3<S> e2 = e3.cross(e1);
  Mat3<S> O;
  O.col(0) = e1;
  O.col(1) = e2;
  O.col(2) = e3;
  return O;
}

template <class S>
Mat3<S> householder_frame(const Vec3<S>& p) {
  Vec3<S> w = Vec3<S>(S(0), S(0), S(-1)) - p;
  S ww = w.dot(w);
  Mat3<S> H = Mat3<S>::Identity() - (w * w.transpose()) * (S(2) / ww);
  Mat3<S> flip = Mat3<S>::Identity();
  flip(0, 0) = S(-1);
  return H * flip;
}

}  // namespace

template <class S>
SouthPoleMove<S> move_singularity_to_south_pole(const HomVectorField<S>& X, const Vec3<S>& p,
                                                double tol) {
  Vec3<S> v = X.template eval<S>(p);
  for (int i = 0; i < 3; ++i)
    if (!negligible<S>(v(i), tol)) throw NotASingularity("X(p) is not zero");
  if (!negligible<S>(p.dot(p) - S(1), tol)) throw PreconditionViolated("p is not a unit vector");
  SouthPoleMove<S> out;
  if (is_zero(p(0)) && is_zero(p(1)) && sgn(p(2)) < 0) {
    out.field = X;
    out.rotation = Mat3<S>::Identity();
    out.frame = "identity";
    return out;
  }
  if constexpr (is_exact_v<S>) {
    try {
      out.rotation = gram_schmidt_frame(p);
      out.frame = "gram-schmidt";
    } catch (const NotRepresentable&) {
      out.rotation = householder_frame(p);
      out.frame = "householder";
    } catch (const MixedRadicand&) {
      out.rotation = householder_frame(p);
      out.frame = "householder";
    }
  } else {
    out.rotation = gram_schmidt_frame(p);
    out.frame = "gram-schmidt";
  }
  out.field = rotate(X, out.rotation);
  return out;
}

namespace {

template <class S>
std::vector<typename Poly3<S>::Exp> monomials_up_to(int deg) {
  std::vector<typename Poly3<S>::Exp> out;
  for (int t = 0; t <= deg; ++t)
    for (int i = t; i >= 0; --i)
      for (int j = t - i; j >= 0; --j) out.push_back({i, j, t - i - j});
  return out;
}

}  // namespace

template <class S>
CofactorResult<S> invariant_plane_cofactor(const HomVectorField<S>& X, const Plane<S>& plane) {
  if (!is_tangent(X)) throw NotTangent("field is not tangent");
  const int n = X.degree();
  const Poly3<S> f = plane.poly();
  const Poly3<S> sph = sphere_poly<S>();
  const Poly3<S> Xf = derive_along(X, f);
  auto unknown_monos = monomials_up_to<S>(std::max(0, n - 1));
  std::vector<Poly3<S>> columns;
  for (const auto& m : unknown_monos) columns.push_back(Poly3<S>::monomial(m, S(1)) * f);
  for (const auto& m : unknown_monos) columns.push_back(Poly3<S>::monomial(m, S(1)) * sph);
  std::map<typename Poly3<S>::Exp, std::size_t> row_of;
  auto row = [&](const typename Poly3<S>::Exp& e) {
    auto it = row_of.find(e);
    if (it != row_of.end()) return it->second;
    std::size_t r = row_of.size();
    row_of.emplace(e, r);
    return r;
  };
  for (const auto& col : columns)
    for (const auto& [e, v] : col.terms()) row(e);
  for (const auto& [e, v] : Xf.terms()) row(e);
  std::vector<std::vector<S>> A(row_of.size(), std::vector<S>(columns.size(), S(0)));
  std::vector<S> b(row_of.size(), S(0));
  for (std::size_t j = 0; j < columns.size(); ++j)
    for (const auto& [e, v] : columns[j].terms()) A[row_of[e]][j] = v;
  for (const auto& [e, v] : Xf.terms()) b[row_of[e]] = v;
  auto sol = solve_linear(A, b);
  CofactorResult<S> out;
  if (!sol.consistent) return out;
  out.invariant = true;
  const std::size_t k = unknown_monos.size();
  for (std::size_t j = 0; j < k; ++j) out.K.add_term(unknown_monos[j], sol.x[j]);
  for (std::size_t j = 0; j < k; ++j) out.multiplier.add_term(unknown_monos[j], sol.x[k + j]);
  // transversality of {f = 0} with the sphere, sampled on the circle
  const double a = to_double(plane.a), bb = to_double(plane.b), c = to_double(plane.c),
               d = to_double(plane.d);
  const double nn = std::sqrt(a * a + bb * bb + c * c);
  const double dist = std::fabs(d) / nn;
  if (nn > 0 && dist < 1.0) {
    Eigen::Vector3d nrm(a / nn, bb / nn, c / nn);
    Eigen::Vector3d centre = -nrm * (d / nn);
    double rad = std::sqrt(1.0 - dist * dist);
    Eigen::Vector3d helper = std::fabs(nrm(0)) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    Eigen::Vector3d u1 = nrm.cross(helper).normalized();
    Eigen::Vector3d u2 = nrm.cross(u1);
    out.transversal = true;
    for (int i = 0; i < 256; ++i) {
      double t = 2.0 * M_PI * i / 256.0;
      Eigen::Vector3d q = centre + rad * (std::cos(t) * u1 + std::sin(t) * u2);
      if (q.cross(nrm).norm() <= 1e-9) out.transversal = false;
    }
  }
  return out;
}

template <class S>
bool first_integral_check(const HomVectorField<S>& X, const Poly3<S>& num, const Poly3<S>& den) {
  Poly3<S> top = derive_along(X, num) * den - num * derive_along(X, den);
  return vanishes_on_sphere(top);
}

Mat3<QuadSurd> cayley_rotation(const Rational& p, const Rational& q, const Rational& r) {
  const Rational w2 = p * p + q * q + r * r;
  const Rational den = 1 + w2;
  const std::array<Rational, 3> w{p, q, r};
  Mat3<QuadSurd> O;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) O(i, j) = QuadSurd(2 * w[i] * w[j] / den);
  for (int i = 0; i < 3; ++i) O(i, i) += QuadSurd((1 - w2) / den);
  // skew part 2K/(1+|w|^2), K = [[0,-r,q],[r,0,-p],[-q,p,0]]
  O(0, 1) += QuadSurd(-2 * r / den);
  O(0, 2) += QuadSurd(2 * q / den);
  O(1, 0) += QuadSurd(2 * r / den);
  O(1, 2) += QuadSurd(-2 * p / den);
  O(2, 0) += QuadSurd(-2 * q / den);
  O(2, 1) += QuadSurd(2 * p / den);
  return O;
}

#define SPHEREFLOW_INSTANTIATE(S)                                                              \
  template struct HomVectorField<S>;                                                           \
  template Poly3<S> derive_along(const HomVectorField<S>&, const Poly3<S>&);                   \
  template bool is_tangent(const HomVectorField<S>&);                                          \
  template HomVectorField<S> expand_quad(const QuadCoeffs<S>&);                                \
  template QuadCoeffs<S> to_quad_normal_form(const HomVectorField<S>&);                        \
  template bool is_orthogonal(const Mat3<S>&, double);                                         \
  template HomVectorField<S> rotate(const HomVectorField<S>&, const Mat3<S>&);                 \
  template SouthPoleMove<S> move_singularity_to_south_pole(const HomVectorField<S>&,           \
                                                           const Vec3<S>&, double);            \
  template CofactorResult<S> invariant_plane_cofactor(const HomVectorField<S>&, const Plane<S>&); \
  template bool first_integral_check(const HomVectorField<S>&, const Poly3<S>&, const Poly3<S>&);

SPHEREFLOW_INSTANTIATE(QuadSurd)
SPHEREFLOW_INSTANTIATE(double)

}  // namespace sphereflow
