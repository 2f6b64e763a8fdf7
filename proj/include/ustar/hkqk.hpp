#pragma once

// Hyperkaehler side: the Haydys form, the Swann bundle of a four-dimensional
// quaternionic Kaehler base with its lifted circle action, and the flat
// hyperkaehler quotient of H^{m+1} by a circle (Calabi metric).

#include <array>
#include <optional>

#include <Eigen/Dense>

#include "ustar/gallery.hpp"
#include "ustar/qk2ustar.hpp"

namespace ustar {

struct HyperkahlerData {
  ChartPtr chart;
  MetricField g;
  std::array<FormField, 3> forms;
  QuaternionicTriple triple;
  std::optional<VectorField> circle;  // fixes w1, rotates w2 + i w3
};

/// Hyperkaehler data of an entry that carries Kaehler forms (flat_hk_<m>).
HyperkahlerData hyperkahler_data(const GalleryEntry& e);

struct HyperkahlerResiduals {
  double closure = 0.0;      // max |d w_i|
  double quaternion = 0.0;   // quaternion relations of the recovered I, J, K
  double compatible = 0.0;   // max |w_i - g(I_i ., .)|
};
HyperkahlerResiduals hyperkahler_residuals(const HyperkahlerData& hk, const Point& x);

/// F = w1 + d d^c_1 mu with d^c_1 f = -df o I.
FormField haydys_form(const HyperkahlerData& hk, const ScalarField& mu);
/// Value at x; throws NotMomentMap unless |d mu - i_X w1| <= 1e-7 there.
TensorD haydys_form(const HyperkahlerData& hk, const ScalarField& mu, const Point& x);

// ---------------------------------------------------------------------------
// Swann bundle over a four-dimensional base: coordinates
// (base, psi1, psi2, psi3, t) with the frame R = Rz(psi1) Ry(psi2) Rz(psi3)
// acting on the coframe self-dual triple, w'_i = sum_j R(j, i) w_j.

inline constexpr double kEulerMargin = 0.1;

class SwannChart {
 public:
  /// c is fitted from da_1 + a_2 ^ a_3 = c w'_1 over the samples unless given.
  SwannChart(MetricField base, std::span<const Point> samples,
             std::optional<double> c = std::nullopt);

  const MetricField& base() const { return base_; }
  const ChartPtr& chart() const { return chart_; }
  double c() const { return c_; }
  double fit_residual() const { return fit_residual_; }

  /// Connection 1-forms a_1, a_2, a_3 on the eight-dimensional chart.
  std::array<TensorJ, 3> connection_forms(const Point& p, int order) const;
  /// Base triple pulled up and rotated by the frame, w'_i.
  std::array<TensorJ, 3> rotated_base_forms(const Point& p, int order) const;
  /// Fundamental fields E_i with a_j(E_i) = delta_ij.
  std::array<Point, 3> fundamental_fields(const Point& p) const;
  /// Horizontal lift of a base vector.
  Point horizontal_lift(const Point& p, std::span<const double> base_vector) const;

  /// Lifts X-bar + sum_i f_i E_i of a base vector field with fibre
  /// coefficients f(p); used for the lifted circle action.
  VectorField lift_field(const VectorField& X,
                         std::function<std::array<Jet, 3>(const Point&, int)> fibre) const;

  /// phi_i = d(t a_i).
  std::array<FormField, 3> swann_forms() const;
  std::array<TensorD, 3> swann_forms(const Point& p) const;
  /// dt ^ a_1 - t a_2 ^ a_3 + t c w'_1 and cyclic.
  std::array<TensorD, 3> swann_expansion(const Point& p) const;
  /// max_i |da_i + a_j ^ a_k - c w'_i|.
  double curvature_residual(const Point& p) const;

  /// Point of the chart over a base point with the given frame and t.
  Point lift_point(const Point& base_point, const Eigen::Matrix3d& frame, double t) const;
  static Eigen::Matrix3d frame(std::span<const double> euler);

 private:
  MetricField base_;
  ChartPtr chart_;
  double c_ = 0.0;
  double fit_residual_ = 0.0;
};

/// Euler angles (psi1, psi2, psi3) of R = Rz Ry Rz; throws DomainViolation
/// when psi2 leaves (kEulerMargin, pi - kEulerMargin).
std::array<double, 3> euler_zyz(const Eigen::Matrix3d& R);

struct LiftedField {
  SwannChart chart;
  MomentSection4d moment;
  VectorField Y;      // X-bar - c sum_i mu'_i E_i
  VectorField X_bar;  // horizontal lift alone (negative control)
  /// Rotated components mu'_i = sum_j R(j, i) mu_j at a chart point.
  std::array<Jet, 3> rotated_moment(const Point& p, int order) const;
  /// max_i |i_Y phi_i - c d(mu'_i t)| with Y or with X-bar.
  double residual(const Point& p, bool horizontal_only = false) const;
  /// c (mu'_1 t, mu'_2 t, mu'_3 t).
  std::array<double, 3> moment_map(const Point& p) const;
};

LiftedField lifted_field(const SwannChart& sc, const MomentSection4d& ms);

/// A point with c mu' t = (c, 0, 0): frame column 1 along the moment section
/// and t = 1 / mu1.
Point level_set_point(const LiftedField& lf, const Point& base_point);

// ---------------------------------------------------------------------------
// Flat quotient: H^{m+1} = C^{m+1} + C^{m+1} with (z, w) -> (e^{it} z, e^{-it} w),
// nu1 = (|z|^2 - |w|^2)/2 - level, nu2 + i nu3 = sum z_a w_a.
// Slice: z_gauge = r > 0 real and largest in modulus, w_gauge solved from
// sum z w = 0, r from nu1 = 0; the other z and w are the 4m coordinates.

struct FlatQuotient {
  int m = 1;
  int gauge = 0;
  double level = 1.0;
  ChartPtr chart;

  /// Point of R^{4m+4} (z's then w's, each (re, im)) over slice coordinates.
  std::vector<Jet> embed(std::span<const Jet> s) const;
  Point embed(const Point& s) const;
  /// Orbit direction (i z, -i w) at a point of R^{4m+4}.
  static Point orbit(const Point& p);
  /// Horizontal images of the coordinate vectors at s.
  std::vector<Point> horizontal_basis(const Point& s) const;
  /// Moment map values (nu1, nu2, nu3) at a point of R^{4m+4}.
  std::array<double, 3> moment(const Point& p) const;
};

FlatQuotient flat_quotient(int m, int gauge = 0, double level = 1.0);
/// Quotient metric on the slice chart.
MetricField flat_quotient_metric(const FlatQuotient& q);
/// The three quotient Kaehler forms on the slice chart.
std::array<FormField, 3> flat_quotient_forms(const FlatQuotient& q);
/// Rotates p into the gauge and returns (quotient, slice coordinates).
/// Throws OffLevelSet beyond 1e-10 and GaugeDegenerate when the largest
/// |z_a| is not unique by 1e-8.
std::pair<FlatQuotient, Point> gauge_fix(int m, const Point& p, double level = 1.0);

}  // namespace ustar
