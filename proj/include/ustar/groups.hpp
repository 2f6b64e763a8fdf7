#pragma once

// Matrix models for the real forms SU*(2m) and U*(2m) = SU*(2m).U(1) of
// GL(2m, C): complex matrices that commute with the antilinear map
// A(z, w) = (conj(w), -conj(z)), possibly up to a phase.  A acts as
// A v = C conj(v) with C = [[0, I], [-I, 0]].

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <vector>

namespace ustar {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

/// The antilinear map as (matrix, conjugation flag): v -> matrix * conj(v)
/// when conjugate is set.
struct AntilinearMap {
  CMatrix matrix;
  bool conjugate = true;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
  /// Composition this o other.
  AntilinearMap compose(const AntilinearMap& other) const;
};

/// C = [[0, I], [-I, 0]] of size n (n even).
CMatrix quaternionic_structure_matrix(int n);
AntilinearMap quaternionic_structure(int n);

/// max |M C - C conj(M)|, the failure of M to commute with A.
double antilinear_commutator(const CMatrix& M);

bool su_star_membership(const CMatrix& M, double tol);

struct UStarResult {
  std::optional<double> theta;  // in [0, pi), set when the defect is within tol
  double best_theta = 0.0;      // the fitted angle, always set
  double phase_defect = 0.0;    // max |M C conj(M)^-1 C^-1 - e^{2 i theta} Id|
  double det_defect = 0.0;      // |det M e^{-2 m i theta} - 1|
  double defect() const { return std::max(phase_defect, det_defect); }
};

/// Full diagnostic; throws Singular when |det M| <= tol.
UStarResult u_star_test(const CMatrix& M, double tol);
std::optional<double> u_star_membership(const CMatrix& M, double tol);

struct Quaternion {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;  // a + b i + c j + d k

  friend Quaternion operator*(const Quaternion& p, const Quaternion& q);
  friend Quaternion operator+(const Quaternion& p, const Quaternion& q);
};

/// Row-major m x m quaternion matrix.
struct QuatMatrix {
  int m = 0;
  std::vector<Quaternion> entries;

  explicit QuatMatrix(int size) : m(size), entries(static_cast<std::size_t>(size * size)) {}
  Quaternion& operator()(int i, int j) { return entries[static_cast<std::size_t>(i * m + j)]; }
  const Quaternion& operator()(int i, int j) const {
    return entries[static_cast<std::size_t>(i * m + j)];
  }
  static QuatMatrix identity(int size);
  friend QuatMatrix operator*(const QuatMatrix& p, const QuatMatrix& q);
};

/// Writing Q = Q1 + j Q2 with complex Q1, Q2, the image is
/// [[conj(Q1), Q2], [-conj(Q2), Q1]]; it commutes with A.
CMatrix quaternionic_embed(const QuatMatrix& Q);

}  // namespace ustar
