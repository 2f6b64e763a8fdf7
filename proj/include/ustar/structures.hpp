#pragma once

// Almost-complex and quaternionic structures, type decomposition of 2-forms,
// the Hodge star in dimension four, and Ricci forms on complex charts.
//
// A 2-form and an endomorphism are related through the metric by
// w(X, Y) = g(I X, Y), i.e. w_ab = g_cb I^c_a and I^c_a = g^cb w_ab.
// Complex charts use real coordinates ordered (x1, y1, x2, y2, ...) with the
// standard structure J0 d/dx = d/dy, and d^c f = -df o J0 so that
// i ddbar f = dd^c f / 2.

#include <array>

#include "ustar/tensorcalc.hpp"

namespace ustar {

/// Complex structure given as an endomorphism field, E(i, j) = J^i_j.
struct AlmostComplexField : EndomorphismField {
  using EndomorphismField::EndomorphismField;
  AlmostComplexField(Field f) : EndomorphismField(std::move(f)) {}  // NOLINT
};

/// Constant standard structure J0 on R^{2m} in (x1, y1, ...) ordering.
TensorD standard_complex_structure(int n);
AlmostComplexField constant_complex_structure(ChartPtr chart, const TensorD& J);

/// Three complex structures evaluated together (they usually share work).
struct QuaternionicTriple {
  ChartPtr chart;
  std::function<std::array<TensorJ, 3>(const Point&, int order)> eval;

  std::array<TensorD, 3> value(const Point& x) const;
  AlmostComplexField component(int i) const;
};

QuaternionicTriple constant_triple(ChartPtr chart, std::array<TensorD, 3> ijk);

/// max over IJ = K, JK = I, KI = J and squares = -Id.
double quaternion_relation_residual(const std::array<TensorD, 3>& ijk);
/// max |g(I X, I Y) - g(X, Y)| over the three structures.
double isometry_residual(const TensorD& g, const std::array<TensorD, 3>& ijk);

// ---------------------------------------------------------------------------
// Conversions through the metric

template <typename T>
Tensor<T> form_from_endomorphism(const Tensor<T>& g, const Tensor<T>& E);
template <typename T>
Tensor<T> endomorphism_from_form(const Tensor<T>& ginv, const Tensor<T>& w);

/// Orthonormal coframe e^a = C(a, i) dx^i by Gram-Schmidt on dx^0, dx^1, ...
/// It is positively oriented with respect to the coordinate order.
TensorJ orthonormal_coframe(const TensorJ& g);

/// Self-dual basis w1 = e01 + e23, w2 = e02 + e31, w3 = e03 + e12 of an
/// oriented orthonormal coframe in dimension 4.
std::array<TensorJ, 3> self_dual_basis(const TensorJ& coframe);

/// The triple of complex structures associated with the self-dual basis of a
/// four-dimensional metric (I1 I2 = I3).
QuaternionicTriple coframe_triple(const MetricField& g);

// ---------------------------------------------------------------------------
// Integrability and type

double nijenhuis(const AlmostComplexField& J, const Point& x);

struct KahlerResiduals {
  double hermitian = 0.0;
  double closure = 0.0;
};
KahlerResiduals kahler_check(const MetricField& g, const AlmostComplexField& J, const Point& x);

/// Kaehler form w(X, Y) = g(JX, Y) as a field.
FormField kahler_form(const MetricField& g, const AlmostComplexField& J);

/// max |w(JX, Y) + w(X, JY)|; zero iff w has type (1,1) for J.
double type11_test(const TensorD& w, const TensorD& J);

// ---------------------------------------------------------------------------
// Hodge star in dimension four; orientation from the coordinate order.

template <typename T>
Tensor<T> hodge_star_4d(const Tensor<T>& g, const Tensor<T>& w);

template <typename T>
std::pair<Tensor<T>, Tensor<T>> sd_split(const Tensor<T>& g, const Tensor<T>& w) {
  const Tensor<T> s = hodge_star_4d(g, w);
  Tensor<T> plus = w, minus = w;
  for (std::size_t k = 0; k < w.size(); ++k) {
    plus.data()[k] = 0.5 * (w.data()[k] + s.data()[k]);
    minus.data()[k] = 0.5 * (w.data()[k] - s.data()[k]);
  }
  return {plus, minus};
}

/// <a, b> = a_ij b^ij / 2, the metric pairing for which e01 has unit norm.
template <typename T>
T form_inner(const Tensor<T>& ginv, const Tensor<T>& a, const Tensor<T>& b);

/// Volume form sqrt(det g) dx^0 ^ ... ^ dx^3.
template <typename T>
Tensor<T> volume_form_4d(const Tensor<T>& g);

/// Coefficient c with a ^ b = c dx^0 ^ dx^1 ^ dx^2 ^ dx^3.
double top_coefficient(const TensorD& four_form);

// ---------------------------------------------------------------------------
// Complex charts

/// Hermitian metric h_{a b-bar} given as (Re h, Im h) on a chart with 2m real
/// coordinates; the associated Riemannian metric is Re(h dz dz-bar).
struct ComplexChartMetric {
  ChartPtr chart;
  int m = 0;
  std::function<std::pair<TensorJ, TensorJ>(std::span<const Jet>)> h;
};

MetricField to_real_metric(const ComplexChartMetric& h);
/// Hermitian metric read off a J0-invariant Riemannian metric.
std::pair<TensorD, TensorD> hermitian_of(const TensorD& g);

/// Ricci form -i ddbar log det h of a J0-Hermitian metric, as a field.
FormField ricci_form(const MetricField& g_hermitian);
TensorD ricci_form(const MetricField& g_hermitian, const Point& x);
TensorD ricci_form(const ComplexChartMetric& h, const Point& x);

/// i ddbar f = dd^c f / 2 at x.
TensorD i_ddbar(const ScalarField& f, const Point& x);

struct PotentialResult {
  double scale = 0.0;     // best s with i ddbar f ~ s * target
  double residual = 0.0;  // max |i ddbar f - s * target|
};
/// With fixed_scale set, the scale is not fitted.
PotentialResult kahler_potential_check(const ScalarField& f, const FormField& target,
                                       const Point& x,
                                       std::optional<double> fixed_scale = std::nullopt);

/// Kaehler trace sum g^{a b-bar} rho_{a b-bar}; half the Riemannian scalar curvature.
double kahler_scalar_curvature(const MetricField& g, const Point& x);

}  // namespace ustar
