#pragma once
// Singular points of degree-two fields from the eigen-structure of the matrix A.

#include "sphereflow/field.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace sphereflow {

template <class S>
struct LinearFormsLMN {
  Poly3<S> L, M, N;
};

template <class S>
struct MatrixA {
  LinearFormsLMN<S> forms;
  Mat3<S> A;  // (L, M, N)^T = A (x, y, z)^T
};

/// A = [[-a7,-a8,-a6],[a4,a5,a3],[-a1,-a2,0]]; X = (L,M,N) x (x,y,z).
template <class S>
MatrixA<S> build_A(const QuadCoeffs<S>& q);

/// (a5+a7)^2 - 4 a4 a8
template <class S>
S alpha_of(const QuadCoeffs<S>& q) {
  return (q(5) + q(7)) * (q(5) + q(7)) - S(4) * q(4) * q(8);
}

/// A matrix for any tangent degree-two field (a gauge with A(2,2) = 0).
template <class S>
Mat3<S> field_matrix(const HomVectorField<S>& X);

enum class LocalType {
  Saddle,
  Node,
  Focus,
  NonDegenerateNonHyperbolic,
  SemiHyperbolic,
  Nilpotent,
  LinearlyZero
};

const char* local_type_name(LocalType t);
inline bool is_hyperbolic(LocalType t) {
  return t == LocalType::Saddle || t == LocalType::Node || t == LocalType::Focus;
}

struct SingularityReport {
  Eigen::Vector3d point;                        // unit vector
  std::optional<Vec3<QuadSurd>> direction;      // exact eigenvector, positive multiple of point
  bool antipode_paired = true;
  Eigen::Matrix2d linearization = Eigen::Matrix2d::Zero();  // DX~(0,0) after moving point to (0,0,-1)
  double trace = 0, det = 0;
  std::complex<double> eig[2];
  LocalType type = LocalType::Saddle;
  bool exact = false;  // signs below decided in exact arithmetic
  int trace_sign = 0, det_sign = 0, disc_sign = 0;
  int w_sign = 0;           // sign of a4 a1^2 + (a5+a7) a1 a2 + a8 a2^2 in the rotated frame
  bool ell_zero = false;    // a1 = a2 = 0 at the point
};

struct SingularSet {
  enum class Kind { Finite, Circle, Everywhere };
  Kind kind = Kind::Finite;
  std::vector<SingularityReport> points;  // isolated points, antipodes both listed
  Eigen::Vector3d circle_normal = Eigen::Vector3d::Zero();
  std::optional<Vec3<QuadSurd>> circle_normal_exact;
  // for a circle: X = l(x) (w x x) with l(x) = normal . x; relation of w to the normal
  enum class Axis { Parallel, InPlane, Oblique } axis = Axis::Oblique;
  bool exact = false;
  std::vector<std::complex<double>> eigenvalues;
};

/// 2 (n^2 - n + 1)
inline int singularity_bound(int n) { return 2 * (n * n - n + 1); }

struct SingularOptions {
  double eig_tol = 1e-9;
  double type_tol = 1e-12;
};

template <class S>
SingularSet enumerate_singularities(const HomVectorField<S>& X, const SingularOptions& opt = {});

/// Rotate p to (0,0,-1) and read off the linear part.
template <class S>
SingularityReport linearize_at(const HomVectorField<S>& X, const Vec3<S>& p, const SingularOptions& opt = {});

/// Exact classification from an unnormalized eigenvector direction (no square roots needed).
SingularityReport classify_direction(const Mat3<QuadSurd>& A, const Vec3<QuadSurd>& v);

/// Independent oracle: Newton refinement from a grid_n x grid_n spherical grid.
std::vector<Eigen::Vector3d> brute_force_singularities(const HomVectorField<double>& X, int grid_n,
                                                       double dedupe_tol = 1e-7);

/// Type from rotated local coefficients a4, a5, a7, a8 (exact or with tolerance).
template <class S>
LocalType local_type_from(const S& a4, const S& a5, const S& a7, const S& a8, double tol = 1e-12);

}  // namespace sphereflow
