#include "ustar/groups.hpp"

#include <cmath>
#include <numbers>

#include "ustar/errors.hpp"

namespace ustar {

namespace {
void require_even(const CMatrix& M) {
  if (M.rows() != M.cols()) throw GeometryError(ErrorKind::InvalidInput, "matrix must be square");
  if (M.rows() % 2 != 0) {
    throw GeometryError(ErrorKind::OddDimension, "U*(2m) models need even size");
  }
}
}  // namespace

Eigen::VectorXcd AntilinearMap::apply(const Eigen::VectorXcd& v) const {
  return conjugate ? Eigen::VectorXcd(matrix * v.conjugate()) : Eigen::VectorXcd(matrix * v);
}

AntilinearMap AntilinearMap::compose(const AntilinearMap& other) const {
  // (M1 K1)(M2 K2) = M1 K1(M2) K1 K2, with K the optional conjugation.
  AntilinearMap out;
  out.matrix = matrix * (conjugate ? CMatrix(other.matrix.conjugate()) : other.matrix);
  out.conjugate = conjugate != other.conjugate;
  return out;
}

CMatrix quaternionic_structure_matrix(int n) {
  if (n % 2 != 0) throw GeometryError(ErrorKind::OddDimension, "structure map needs even size");
  const int m = n / 2;
  CMatrix C = CMatrix::Zero(n, n);
  C.block(0, m, m, m) = CMatrix::Identity(m, m);
  C.block(m, 0, m, m) = -CMatrix::Identity(m, m);
  return C;
}

AntilinearMap quaternionic_structure(int n) { return {quaternionic_structure_matrix(n), true}; }

double antilinear_commutator(const CMatrix& M) {
  require_even(M);
  const CMatrix C = quaternionic_structure_matrix(static_cast<int>(M.rows()));
  return (M * C - C * M.conjugate()).cwiseAbs().maxCoeff();
}

bool su_star_membership(const CMatrix& M, double tol) {
  require_even(M);
  return antilinear_commutator(M) <= tol && std::abs(M.determinant() - Complex(1.0)) <= tol;
}

UStarResult u_star_test(const CMatrix& M, double tol) {
  require_even(M);
  const int n = static_cast<int>(M.rows());
  const int m = n / 2;
  const Complex det = M.determinant();
  if (std::abs(det) <= tol) throw GeometryError(ErrorKind::Singular, "|det M| below tolerance");
  const CMatrix C = quaternionic_structure_matrix(n);
  const CMatrix P = M * C * M.conjugate().inverse() * C.inverse();
  Complex phase = P(0, 0);
  if (std::abs(phase) < 0.5) {
    Eigen::Index r = 0, c = 0;
    P.cwiseAbs().maxCoeff(&r, &c);
    phase = P(r, c);
  }
  double theta = 0.5 * std::arg(phase);
  if (theta < 0) theta += std::numbers::pi;
  if (theta >= std::numbers::pi) theta -= std::numbers::pi;
  const Complex e2 = std::polar(1.0, 2.0 * theta);
  UStarResult r;
  r.best_theta = theta;
  r.phase_defect = (P - e2 * CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  r.det_defect = std::abs(det * std::polar(1.0, -2.0 * m * theta) - Complex(1.0));
  if (r.defect() <= tol) r.theta = theta;
  return r;
}

std::optional<double> u_star_membership(const CMatrix& M, double tol) {
  return u_star_test(M, tol).theta;
}

Quaternion operator*(const Quaternion& p, const Quaternion& q) {
  return {p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
          p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
          p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
          p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a};
}

Quaternion operator+(const Quaternion& p, const Quaternion& q) {
  return {p.a + q.a, p.b + q.b, p.c + q.c, p.d + q.d};
}

QuatMatrix QuatMatrix::identity(int size) {
  QuatMatrix q(size);
  for (int i = 0; i < size; ++i) q(i, i).a = 1.0;
  return q;
}

QuatMatrix operator*(const QuatMatrix& p, const QuatMatrix& q) {
  QuatMatrix out(p.m);
  for (int i = 0; i < p.m; ++i)
    for (int j = 0; j < p.m; ++j)
      for (int k = 0; k < p.m; ++k) out(i, j) = out(i, j) + p(i, k) * q(k, j);
  return out;
}

CMatrix quaternionic_embed(const QuatMatrix& Q) {
  const int m = Q.m;
  CMatrix M(2 * m, 2 * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const Quaternion& q = Q(i, j);
      // q = (a + b i) + j (c - d i)
      const Complex q1(q.a, q.b);
      const Complex q2(q.c, -q.d);
      M(i, j) = std::conj(q1);
      M(i, j + m) = q2;
      M(i + m, j) = -std::conj(q2);
      M(i + m, j + m) = q1;
    }
  return M;
}

}  // namespace ustar
