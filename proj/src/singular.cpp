#include "sphereflow/singular.hpp"

#include "sphereflow/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace sphereflow {

const char* local_type_name(LocalType t) {
  switch (t) {
    case LocalType::Saddle: return "saddle";
    case LocalType::Node: return "node";
    case LocalType::Focus: return "focus";
    case LocalType::NonDegenerateNonHyperbolic: return "nondegenerate-nonhyperbolic";
    case LocalType::SemiHyperbolic: return "semi-hyperbolic";
    case LocalType::Nilpotent: return "nilpotent";
    case LocalType::LinearlyZero: return "linearly-zero";
  }
  return "?";
}

template <class S>
MatrixA<S> build_A(const QuadCoeffs<S>& q) {
  MatrixA<S> out;
  out.A << -q(7), -q(8), -q(6), q(4), q(5), q(3), -q(1), -q(2), S(0);
  auto row = [&](int i) {
    return px<S>() * out.A(i, 0) + py<S>() * out.A(i, 1) + pz<S>() * out.A(i, 2);
  };
  out.forms = {row(0), row(1), row(2)};
  return out;
}

template <class S>
Mat3<S> field_matrix(const HomVectorField<S>& X) {
  return build_A(to_quad_normal_form(X)).A;
}

namespace {

template <class S>
int sign_tol(const S& x, double tol) {
  if constexpr (is_exact_v<S>) {
    (void)tol;
    return sgn(x);
  } else {
    return std::fabs(x) <= tol ? 0 : sgn(x);
  }
}

LocalType type_from_signs(bool zero, int tr, int det, int disc) {
  if (zero) return LocalType::LinearlyZero;
  if (det < 0) return LocalType::Saddle;
  if (det == 0) return tr != 0 ? LocalType::SemiHyperbolic : LocalType::Nilpotent;
  if (tr == 0) return LocalType::NonDegenerateNonHyperbolic;
  return disc >= 0 ? LocalType::Node : LocalType::Focus;
}

void fill_numeric(SingularityReport& r, const Eigen::Matrix2d& m) {
  r.linearization = m;
  r.trace = m.trace();
  r.det = m.determinant();
  std::complex<double> disc = std::sqrt(std::complex<double>(r.trace * r.trace - 4 * r.det));
  r.eig[0] = (r.trace + disc) / 2.0;
  r.eig[1] = (r.trace - disc) / 2.0;
}

}  // namespace

template <class S>
LocalType local_type_from(const S& a4, const S& a5, const S& a7, const S& a8, double tol) {
  const S tr = -a4 - a8;
  const S det = a4 * a8 - a5 * a7;
  const S disc = tr * tr - S(4) * det;
  double scale = 1.0;
  if constexpr (!is_exact_v<S>) scale = std::max({1.0, std::fabs(a4), std::fabs(a5), std::fabs(a7), std::fabs(a8)});
  bool zero = sign_tol(a4, tol * scale) == 0 && sign_tol(a5, tol * scale) == 0 &&
              sign_tol(a7, tol * scale) == 0 && sign_tol(a8, tol * scale) == 0;
  return type_from_signs(zero, sign_tol(tr, tol * scale), sign_tol(det, tol * scale * scale),
                         sign_tol(disc, tol * scale * scale));
}

template <class S>
SingularityReport linearize_at(const HomVectorField<S>& X, const Vec3<S>& p, const SingularOptions& opt) {
  auto mv = move_singularity_to_south_pole(X, p);
  QuadCoeffs<S> q = to_quad_normal_form(mv.field);
  SingularityReport r;
  for (int i = 0; i < 3; ++i) r.point(i) = to_double(p(i));
  Eigen::Matrix2d m;
  m << -to_double(q(4)), -to_double(q(5)), -to_double(q(7)), -to_double(q(8));
  fill_numeric(r, m);
  r.exact = is_exact_v<S>;
  const double tol = opt.type_tol;
  double scale = 1.0;
  if constexpr (!is_exact_v<S>) scale = std::max({1.0, m.cwiseAbs().maxCoeff()});
  const S tr = -q(4) - q(8);
  const S det = q(4) * q(8) - q(5) * q(7);
  r.trace_sign = sign_tol(tr, tol * scale);
  r.det_sign = sign_tol(det, tol * scale * scale);
  r.disc_sign = sign_tol(tr * tr - S(4) * det, tol * scale * scale);
  r.type = local_type_from(q(4), q(5), q(7), q(8), tol);
  const S w = q(4) * q(1) * q(1) + (q(5) + q(7)) * q(1) * q(2) + q(8) * q(2) * q(2);
  r.w_sign = sign_tol(w, tol * scale * scale * scale);
  r.ell_zero = sign_tol(q(1), tol * scale) == 0 && sign_tol(q(2), tol * scale) == 0;
  if constexpr (is_exact_v<S>) r.direction = p;
  return r;
}

SingularityReport classify_direction(const Mat3<QuadSurd>& A, const Vec3<QuadSurd>& v) {
  using Q = QuadSurd;
  // X(x) = (A x) x x, so DX(v) h = (A h) x v + (A v) x h
  Mat3<Q> J;
  const Vec3<Q> Av = A * v;
  for (int k = 0; k < 3; ++k) {
    Vec3<Q> e = Vec3<Q>::Zero();
    e(k) = Q(1);
    Vec3<Q> Ae = A * e;
    J.col(k) = Ae.cross(v) + Av.cross(e);
  }
  SingularityReport r;
  r.direction = v;
  r.exact = true;
  const Q tr = J.trace();
  const Q e2 = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0) + J(0, 0) * J(2, 2) - J(0, 2) * J(2, 0) +
               J(1, 1) * J(2, 2) - J(1, 2) * J(2, 1);
  bool zero = true;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (!is_zero(J(i, j))) zero = false;
  r.trace_sign = sgn(tr);
  r.det_sign = sgn(e2);
  r.disc_sign = sgn(tr * tr - Q(4) * e2);
  r.type = type_from_signs(zero, r.trace_sign, r.det_sign, r.disc_sign);
  const Q vv = v.dot(v);
  const Vec3<Q> atv = A.transpose() * v;
  const Vec3<Q> ell = atv * vv - v * v.dot(atv);
  r.ell_zero = is_zero(ell(0)) && is_zero(ell(1)) && is_zero(ell(2));
  r.w_sign = -sgn(ell.dot(J * ell));
  Eigen::Vector3d pd(to_double(v(0)), to_double(v(1)), to_double(v(2)));
  r.point = pd.normalized();
  return r;
}

namespace {

using Q = QuadSurd;

bool all_rational(const Mat3<Q>& A) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (!A(i, j).is_rational()) return false;
  return true;
}

std::vector<Rational> convergents(double x, int max_terms = 40) {
  std::vector<Rational> out;
  if (!std::isfinite(x)) return out;
  Integer h0 = 1, h1 = 0, k0 = 0, k1 = 1;
  double r = x;
  for (int i = 0; i < max_terms; ++i) {
    double fl = std::floor(r);
    if (std::fabs(fl) > 1e15) break;
    Integer a = Integer(static_cast<long long>(fl));
    Integer h = a * h0 + h1, k = a * k0 + k1;
    h1 = h0;
    h0 = h;
    k1 = k0;
    k0 = k;
    out.push_back(Rational(h, k));
    double frac = r - fl;
    if (frac < 1e-13) break;
    r = 1.0 / frac;
    if (k > Integer(1000000000)) break;
  }
  return out;
}

struct ExactRoot {
  Q value;
  int mult;
};

// Real roots of the characteristic polynomial in exact form, or nullopt if not representable.
std::optional<std::vector<ExactRoot>> exact_real_roots(const Mat3<Q>& A, std::vector<std::complex<double>>& numeric) {
  const Q tr = A.trace();
  const Q e2 = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0) + A(0, 0) * A(2, 2) - A(0, 2) * A(2, 0) +
               A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1);
  const Q det = A(0, 0) * (A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1)) -
                A(0, 1) * (A(1, 0) * A(2, 2) - A(1, 2) * A(2, 0)) +
                A(0, 2) * (A(1, 0) * A(2, 1) - A(1, 1) * A(2, 0));
  UPoly<Q> chi(std::vector<Q>{-det, e2, -tr, Q(1)});
  UPoly<Q> g = poly_gcd(chi, chi.derivative());
  std::vector<ExactRoot> roots;
  if (g.degree() == 2) {
    roots.push_back({tr / Q(3), 3});
    return roots;
  }
  if (g.degree() == 1) {
    Q r = -g.c[0] / g.c[1];
    UPoly<Q> quot;
    poly_rem(chi, UPoly<Q>(std::vector<Q>{r * r, Q(-2) * r, Q(1)}), &quot);
    Q s = -quot.c[0] / quot.c[1];
    roots.push_back({r, 2});
    roots.push_back({s, 1});
    return roots;
  }
  std::optional<Q> rational_root;
  for (const auto& z : numeric) {
    if (std::fabs(z.imag()) > 1e-6 * std::max(1.0, std::abs(z))) continue;
    for (const auto& c : convergents(z.real())) {
      if (chi.eval(Q(c)).is_zero()) {
        rational_root = Q(c);
        break;
      }
    }
    if (rational_root) break;
  }
  if (!rational_root) return std::nullopt;
  const Q r = *rational_root;
  UPoly<Q> quot;
  poly_rem(chi, UPoly<Q>(std::vector<Q>{-r, Q(1)}), &quot);
  roots.push_back({r, 1});
  const Q B = quot.c[1], C = quot.c[0];
  const Q disc = B * B - Q(4) * C;
  if (disc.sign() < 0) return roots;
  Q sd = disc.sqrt();  // may throw NotRepresentable
  roots.push_back({(-B + sd) / Q(2), 1});
  roots.push_back({(-B - sd) / Q(2), 1});
  return roots;
}

std::vector<Vec3<Q>> exact_nullspace(const Mat3<Q>& B) {
  std::vector<std::vector<Q>> rows(3, std::vector<Q>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rows[i][j] = B(i, j);
  auto sol = solve_linear<Q>(rows, {});
  std::vector<Vec3<Q>> out;
  for (auto& v : sol.nullspace) out.push_back(Vec3<Q>(v[0], v[1], v[2]));
  return out;
}

Eigen::Vector3d dvec(const Vec3<Q>& v) { return {to_double(v(0)), to_double(v(1)), to_double(v(2))}; }

void sort_points(SingularSet& s) {
  std::sort(s.points.begin(), s.points.end(), [](const SingularityReport& a, const SingularityReport& b) {
    for (int i = 0; i < 3; ++i)
      if (std::fabs(a.point(i) - b.point(i)) > 1e-12) return a.point(i) < b.point(i);
    return false;
  });
}

// Linearization numbers from a double rotation; signs already decided.
void attach_numeric(SingularityReport& r, const HomVectorField<double>& Xd) {
  auto mv = move_singularity_to_south_pole(Xd, Vec3<double>(r.point), 1e-6);
  auto q = to_quad_normal_form(mv.field);
  Eigen::Matrix2d m;
  m << -q(4), -q(5), -q(7), -q(8);
  fill_numeric(r, m);
}

std::optional<SingularSet> enumerate_exact(const HomVectorField<Q>& X, const Mat3<Q>& A,
                                           std::vector<std::complex<double>> numeric) {
  std::optional<std::vector<ExactRoot>> roots;
  try {
    roots = exact_real_roots(A, numeric);
  } catch (const NotRepresentable&) {
    return std::nullopt;
  }
  if (!roots) return std::nullopt;
  SingularSet out;
  out.exact = true;
  out.eigenvalues = std::move(numeric);
  const auto Xd = X.to_double();
  for (const auto& root : *roots) {
    Mat3<Q> B = A - Mat3<Q>::Identity() * root.value;
    auto ns = exact_nullspace(B);
    if (ns.size() == 3) {
      out.kind = SingularSet::Kind::Everywhere;
      out.points.clear();
      return out;
    }
    if (ns.size() == 2) {
      out.kind = SingularSet::Kind::Circle;
      Vec3<Q> n = ns[0].cross(ns[1]);
      out.circle_normal_exact = n;
      out.circle_normal = dvec(n).normalized();
      // B = u w^T with w parallel to n
      int bi = 0, bj = 0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          if (!B(i, j).is_zero() && B(bi, bj).is_zero()) {
            bi = i;
            bj = j;
          }
      Vec3<Q> w = B.row(bi).transpose();
      Vec3<Q> u = B.col(bj) / w(bj);
      Vec3<Q> c = u.cross(w);
      if (c(0).is_zero() && c(1).is_zero() && c(2).is_zero())
        out.axis = SingularSet::Axis::Parallel;
      else if (u.dot(w).is_zero())
        out.axis = SingularSet::Axis::InPlane;
      else
        out.axis = SingularSet::Axis::Oblique;
      continue;
    }
    for (const auto& v : ns) {
      for (int s : {1, -1}) {
        Vec3<Q> vs = v * Q(s);
        SingularityReport r = classify_direction(A, vs);
        attach_numeric(r, Xd);
        out.points.push_back(std::move(r));
      }
    }
  }
  if (out.kind == SingularSet::Kind::Circle) {
    // isolated points off the circle are still reported
    const Eigen::Vector3d n = out.circle_normal;
    std::erase_if(out.points, [&](const SingularityReport& r) { return std::fabs(r.point.dot(n)) < 1e-12; });
  }
  sort_points(out);
  return out;
}

SingularSet enumerate_float(const HomVectorField<double>& X, const Eigen::Matrix3d& A, const SingularOptions& opt) {
  SingularSet out;
  Eigen::EigenSolver<Eigen::Matrix3d> es(A, false);
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  std::vector<double> reals;
  for (int i = 0; i < 3; ++i) {
    auto z = es.eigenvalues()(i);
    out.eigenvalues.push_back(z);
    if (std::fabs(z.imag()) <= 1e-10 * scale) reals.push_back(z.real());
  }
  std::sort(reals.begin(), reals.end());
  std::vector<double> groups;
  for (double r : reals)
    if (groups.empty() || std::fabs(r - groups.back()) > opt.eig_tol * scale) groups.push_back(r);
  for (double lam : groups) {
    Eigen::Matrix3d B = A - lam * Eigen::Matrix3d::Identity();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int nulldim = 0;
    for (int i = 0; i < 3; ++i)
      if (sv(i) <= opt.eig_tol * scale) ++nulldim;
    if (nulldim == 0) nulldim = 1;  // nearest direction; Newton polish below
    if (nulldim == 3) {
      out.kind = SingularSet::Kind::Everywhere;
      out.points.clear();
      return out;
    }
    if (nulldim == 2) {
      out.kind = SingularSet::Kind::Circle;
      Eigen::Vector3d w = svd.matrixV().col(0), u = svd.matrixU().col(0);
      out.circle_normal = w;
      if (u.cross(w).norm() <= 1e-9)
        out.axis = SingularSet::Axis::Parallel;
      else if (std::fabs(u.dot(w)) <= 1e-9)
        out.axis = SingularSet::Axis::InPlane;
      else
        out.axis = SingularSet::Axis::Oblique;
      continue;
    }
    Eigen::Vector3d v = svd.matrixV().col(2).normalized();
    for (int s : {1, -1}) {
      Eigen::Vector3d p = v * s;
      bool dup = false;
      for (const auto& r : out.points)
        if ((r.point - p).norm() < 1e-7) dup = true;
      if (dup) continue;
      SingularityReport r = linearize_at(X, Vec3<double>(p), opt);
      r.point = p;
      out.points.push_back(std::move(r));
    }
  }
  if (out.kind == SingularSet::Kind::Circle) {
    const Eigen::Vector3d n = out.circle_normal;
    std::erase_if(out.points, [&](const SingularityReport& r) { return std::fabs(r.point.dot(n)) < 1e-9; });
  }
  sort_points(out);
  return out;
}

}  // namespace

template <class S>
SingularSet enumerate_singularities(const HomVectorField<S>& X, const SingularOptions& opt) {
  if (!is_tangent(X)) throw NotTangent("field is not tangent to the sphere");
  if (X.degree() != 2) throw NotDegreeTwo("enumeration needs a degree-two field");
  const Mat3<S> A = field_matrix(X);
  Eigen::Matrix3d Ad;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) Ad(i, j) = to_double(A(i, j));
  if constexpr (is_exact_v<S>) {
    if (all_rational(A)) {
      Eigen::EigenSolver<Eigen::Matrix3d> es(Ad, false);
      std::vector<std::complex<double>> numeric;
      for (int i = 0; i < 3; ++i) numeric.push_back(es.eigenvalues()(i));
      if (auto res = enumerate_exact(X, A, numeric)) return *res;
    }
    return enumerate_float(X.to_double(), Ad, opt);
  } else {
    return enumerate_float(X, Ad, opt);
  }
}

std::vector<Eigen::Vector3d> brute_force_singularities(const HomVectorField<double>& X, int grid_n,
                                                       double dedupe_tol) {
  if (X.degree() != 2) throw NotDegreeTwo("oracle expects a degree-two field");
  std::array<std::array<Poly3<double>, 3>, 3> D;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) D[i][j] = X.c[i].derivative(j);
  double scale = 0;
  for (const auto& c : X.c)
    for (const auto& [e, v] : c.terms()) scale = std::max(scale, std::fabs(v));
  if (scale == 0) scale = 1;
  std::vector<Eigen::Vector3d> found;
  for (int i = 0; i < grid_n; ++i) {
    const double th = M_PI * (i + 0.5) / grid_n;
    for (int j = 0; j < grid_n; ++j) {
      const double ph = 2 * M_PI * j / grid_n;
      Eigen::Vector3d p(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
      bool ok = false;
      for (int it = 0; it < 200; ++it) {
        Eigen::Vector3d f = X.eval<double>(p);
        if (f.norm() <= 1e-15 * scale) {
          ok = true;
          break;
        }
        Eigen::Matrix<double, 4, 3> M;
        std::array<double, 3> a{p(0), p(1), p(2)};
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) M(r, c) = D[r][c].eval(a);
        M.row(3) = p.transpose();
        Eigen::Matrix<double, 4, 1> rhs;
        rhs << -f, 0.0;
        Eigen::Vector3d h = M.completeOrthogonalDecomposition().solve(rhs);
        if (h.norm() > 0.5) h *= 0.5 / h.norm();
        p = (p + h).normalized();
        if (h.norm() < 1e-15) {
          ok = X.eval<double>(p).norm() <= 1e-10 * scale;
          break;
        }
      }
      if (!ok) ok = X.eval<double>(p).norm() <= 1e-10 * scale;
      if (!ok) continue;
      bool dup = false;
      for (const auto& q : found)
        if ((q - p).norm() < dedupe_tol) dup = true;
      if (!dup) found.push_back(p);
    }
  }
  return found;
}

#define SPHEREFLOW_INSTANTIATE(S)                                                                  \
  template MatrixA<S> build_A(const QuadCoeffs<S>&);                                               \
  template Mat3<S> field_matrix(const HomVectorField<S>&);                                         \
  template LocalType local_type_from(const S&, const S&, const S&, const S&, double);              \
  template SingularityReport linearize_at(const HomVectorField<S>&, const Vec3<S>&, const SingularOptions&); \
  template SingularSet enumerate_singularities(const HomVectorField<S>&, const SingularOptions&);

SPHEREFLOW_INSTANTIATE(QuadSurd)
SPHEREFLOW_INSTANTIATE(double)

}  // namespace sphereflow
