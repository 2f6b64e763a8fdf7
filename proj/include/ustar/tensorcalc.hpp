#pragma once

// Coordinate charts, tensor fields evaluable in jet arithmetic, and the
// basic Riemannian toolkit: Levi-Civita connection, curvature, exterior
// derivative, musical isomorphisms and the Killing equation.
//
// Conventions used throughout:
//   * a rank-2 endomorphism E stores E(i, j) = E^i_j, acting as (EV)^i = E^i_j V^j;
//   * a connection stores G(k, i, j) = Gamma^k_ij with nabla_i d_j = Gamma^k_ij d_k;
//   * curvature R(i, j, k, l) = R^i_jkl with R(d_k, d_l) d_j = R^i_jkl d_i;
//   * a p-form is the full antisymmetric array w(i1..ip), so
//     (dx0 ^ dx1)(0, 1) = 1 and (a ^ b)(i, j) = a_i b_j - a_j b_i;
//   * interior products contract the first slot, (i_X w)(Y) = w(X, Y).

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustar/errors.hpp"
#include "ustar/jet.hpp"
#include "ustar/tensor.hpp"

namespace ustar {

using Point = std::vector<double>;

struct Chart {
  std::string name;
  int dim = 0;
  std::vector<std::string> coord_labels;
  std::function<bool(std::span<const double>)> domain;

  bool contains(std::span<const double> x) const;
  /// Throws DomainViolation when x is outside the chart.
  void require(std::span<const double> x) const;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_chart(std::string name, std::vector<std::string> labels,
                    std::function<bool(std::span<const double>)> domain = {});

/// Closed-form field components as a function of coordinate jets.
using JetFormula = std::function<TensorJ(std::span<const Jet>)>;
/// Field components at a point, as jets of the requested order in the
/// chart coordinates.
using Evaluator = std::function<TensorJ(const Point&, int order)>;

class Field {
 public:
  Field() = default;
  Field(ChartPtr chart, int rank, Evaluator eval);
  Field(ChartPtr chart, int rank, JetFormula formula);

  const Chart& chart() const { return *chart_; }
  const ChartPtr& chart_ptr() const { return chart_; }
  int dim() const { return chart_->dim; }
  int rank() const { return rank_; }

  /// Components at x to the given jet order; rejects points off the chart.
  TensorJ eval(const Point& x, int order) const;
  TensorD value(const Point& x) const { return values(eval(x, 0)); }

  /// Closed-form fields can be evaluated on arbitrary jets (for pullbacks).
  bool has_formula() const { return static_cast<bool>(formula_); }
  TensorJ eval_jets(std::span<const Jet> coords) const;

 protected:
  ChartPtr chart_;
  int rank_ = 0;
  Evaluator eval_;
  JetFormula formula_;
};

struct ScalarField : Field {
  using Field::Field;
  ScalarField(Field f) : Field(std::move(f)) {}  // NOLINT
  Jet eval_scalar(const Point& x, int order) const { return eval(x, order)(0); }
};

struct VectorField : Field {
  using Field::Field;
  VectorField(Field f) : Field(std::move(f)) {}  // NOLINT
};

struct FormField : Field {
  using Field::Field;
  FormField(Field f) : Field(std::move(f)) {}  // NOLINT
  int degree() const { return rank(); }
};

struct EndomorphismField : Field {
  using Field::Field;
  EndomorphismField(Field f) : Field(std::move(f)) {}  // NOLINT
};

struct Signature {
  int positive = 0;
  int negative = 0;
};

struct MetricField : Field {
  MetricField() = default;
  MetricField(Field f, Signature sig) : Field(std::move(f)), signature(sig) {}
  Signature signature;
};

struct ConnectionField : Field {
  using Field::Field;
  ConnectionField(Field f) : Field(std::move(f)) {}  // NOLINT
};

/// Tolerances fixed for double-precision jets.
inline constexpr double kDerivTol = 1e-8;
inline constexpr double kDegeneracyTol = 1e-12;

// ---------------------------------------------------------------------------
// Construction helpers

ScalarField scalar_field(ChartPtr chart, std::function<Jet(std::span<const Jet>)> f);
VectorField vector_field(ChartPtr chart,
                         std::function<std::vector<Jet>(std::span<const Jet>)> f);
MetricField metric_from_formula(ChartPtr chart, Signature sig, JetFormula f);
/// Diagonal metric sum_i h_i(x) dx_i^2.
MetricField diagonal_metric(ChartPtr chart,
                            std::function<std::vector<Jet>(std::span<const Jet>)> diag);
/// Metric sum_a w_a(x) theta_a^2 for a coframe theta_a = sum_i C(a, i) dx_i.
MetricField coframe_metric(
    ChartPtr chart,
    std::function<std::pair<std::vector<Jet>, TensorJ>(std::span<const Jet>)> weights_coframe);
MetricField euclidean_metric(ChartPtr chart);

/// Metric f * g.
MetricField conformal_rescale(const MetricField& g, const ScalarField& f);

/// Pull a closed-form metric back along a closed-form coordinate map from
/// `source` into the metric's chart.
MetricField pullback_metric(
    const MetricField& g, ChartPtr source,
    std::function<std::vector<Jet>(std::span<const Jet>)> map);

// ---------------------------------------------------------------------------
// Metric and connection operations

/// Throws DegenerateMetric when |det g| <= tol * prod(row norms).
void require_nondegenerate(const TensorD& g);
Signature signature_of(const TensorD& g);

ConnectionField levi_civita(const MetricField& g);
/// Christoffel symbols of g at x.
TensorD christoffel(const MetricField& g, const Point& x);

/// R(i, j, k, l) = R^i_jkl at x.
TensorD riemann(const ConnectionField& conn, const Point& x);
/// Ric_jl = R^i_jil.
TensorD ricci(const ConnectionField& conn, const Point& x);
/// Levi-Civita curvature of a metric (a metric also converts to a Field, so
/// these overloads keep it from being read as Christoffel symbols).
TensorD riemann(const MetricField& g, const Point& x);
TensorD ricci(const MetricField& g, const Point& x);
/// Riemannian scalar curvature, positive on round spheres.
double ricci_scalar(const MetricField& g, const Point& x);
/// Sectional curvature of the plane spanned by u, v.
double sectional_curvature(const MetricField& g, const Point& x, std::span<const double> u,
                           std::span<const double> v);
/// Fit R_ijkl = k (g_ik g_jl - g_il g_jk); returns {k, max residual}.
std::pair<double, double> constant_curvature_fit(const MetricField& g, const Point& x);
/// Max |R_jl - lambda g_jl| with lambda = R / n; also returns lambda.
std::pair<double, double> einstein_fit(const MetricField& g, const Point& x);

/// R_ijkl R^ijkl, a chart-independent curvature invariant.
double riemann_norm_squared(const MetricField& g, const Point& x);

double torsion_residual(const ConnectionField& conn, const Point& x);
/// max |nabla_k g_ij|.
double metric_compatibility_residual(const MetricField& g, const ConnectionField& conn,
                                     const Point& x);
/// max |R^i_jkl + R^i_klj + R^i_ljk|.
double bianchi_residual(const ConnectionField& conn, const Point& x);

// ---------------------------------------------------------------------------
// Forms

/// Alternating fill: writes v at every permutation of `sorted` with sign.
template <typename T>
void set_alternating(Tensor<T>& t, std::span<const int> sorted, const T& v);

TensorJ wedge(const TensorJ& a, const TensorJ& b);
TensorD wedge(const TensorD& a, const TensorD& b);
/// Exterior derivative from components given to one order above the result.
TensorJ ext_d(const TensorJ& form_plus_one);
FormField ext_d(const FormField& w);
TensorD ext_d(const FormField& w, const Point& x);
/// i_X w, contracting the first slot.
TensorJ interior(const TensorJ& X, const TensorJ& w);
FormField interior(const VectorField& X, const FormField& w);
FormField wedge(const FormField& a, const FormField& b);
FormField operator+(const FormField& a, const FormField& b);
FormField scaled(const FormField& w, double s);

/// Constant-coefficient p-form on a chart.
FormField constant_form(ChartPtr chart, const TensorD& components);

// ---------------------------------------------------------------------------
// Musical isomorphisms and vector fields

TensorD flat(const MetricField& g, const Point& x, std::span<const double> v);
TensorD sharp(const MetricField& g, const Point& x, std::span<const double> a);
FormField flat(const MetricField& g, const VectorField& X);

/// max |(L_X g)_ij|.
double killing_residual(const MetricField& g, const VectorField& X, const Point& x);
/// Lie derivative of a 2-form along X via Cartan: d i_X w + i_X d w.
FormField lie_derivative(const VectorField& X, const FormField& w);

}  // namespace ustar

#include "ustar/tensorcalc_impl.hpp"
