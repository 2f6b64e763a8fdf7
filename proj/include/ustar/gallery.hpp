#pragma once

// Closed-form example geometries: the round four-sphere and its scalar-flat
// conformal rescaling, the Heisenberg-invariant Bergman metric and the
// scalar-flat family built on it, flat hyperkaehler space, and flat R^4.

#include <complex>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ustar/structures.hpp"

namespace ustar {

using Rng = std::mt19937_64;

struct GalleryEntry {
  std::string id;
  std::string description;
  ChartPtr chart;
  MetricField metric;
  std::optional<VectorField> killing;
  std::optional<QuaternionicTriple> triple;
  /// Hyperkaehler entries carry closed Kaehler forms for the triple.
  std::optional<std::array<FormField, 3>> kahler_forms;
  /// Complex structure known in closed form (Kaehler entries).
  std::optional<AlmostComplexField> complex_structure;
  /// Alternative presentations on other charts, by chart name.
  std::map<std::string, MetricField> alternate;
  /// Random interior points of the main chart.
  std::function<Point(Rng&)> sample;
  /// Points on the zero set of the moment section, if any (for transform).
  std::function<std::vector<Point>()> degenerate_points;
  /// Default box for random holonomy loops: basepoint of the survey.
  Point basepoint;
  int quaternionic_dim = 1;  // m, with real dimension 4m
};

/// Ids understood by make_entry, e.g. "s4", "scalflat", "scalflat_c1".
std::vector<std::string> gallery_ids();
/// Throws UnknownEntry.
GalleryEntry make_entry(const std::string& id);

/// Runs the invariant table of an entry on a few seeded points; returns the
/// failed check names (empty when the entry is consistent).
std::vector<std::string> self_test(const GalleryEntry& e, std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Four-sphere (radius 1/2, sectional curvature 4)

/// Stereographic chart y in R^4, g = |dy|^2 / (1 + |y|^2)^2.
GalleryEntry s4_entry();
/// Chart (rho, sigma, phi, theta): polar radii of the two R^2 factors.
MetricField s4_rho_sigma_metric();
/// Chart (u, v, phi, theta) adapted to the rotation of the second factor.
MetricField s4_uv_metric();
/// Rotation of the second R^2 factor in each chart.
VectorField s4_rotation_cartesian(ChartPtr chart);
VectorField s4_rotation_angle(ChartPtr chart);  // d/dtheta, last coordinate
/// (rho, sigma) -> (u, v).
std::pair<double, double> s4_uv_from_rho_sigma(double rho, double sigma);
/// Cartesian y -> (rho, sigma, phi, theta).
Point s4_polar_from_cartesian(const Point& y);

/// Scalar-flat Kaehler rescaling on the (u, v, phi, theta) chart.
GalleryEntry s4_scalarflat_entry();
/// Same metric on (x, y, phi, theta) with u = tanh(2x)/2, v = 2 tan(y).
MetricField s4_scalarflat_split_metric();
/// Two-dimensional factors: dv^2/(v^2+4)^2 + dphi^2/(v^2+4) (curvature 4)
/// and du^2/(1-4u^2)^2 + u^2 dtheta^2/(1-4u^2) (curvature -4).
MetricField sphere_factor_metric();
MetricField hyperbolic_factor_metric();

// ---------------------------------------------------------------------------
// Heisenberg-invariant metrics on (rho, x1, x2, x3), rho > 0, with the
// coframe sigma1 = dx1 + 2 x2 dx3, sigma2 = dx2, sigma3 = dx3.

/// Left-invariant coframe rows (drho, sigma1, sigma2, sigma3) in coordinates.
TensorJ heisenberg_coframe(std::span<const Jet> x);

/// c = 0: (drho^2 + sigma1^2 + 2 rho (sigma2^2 + sigma3^2)) / (4 rho^2).
/// c > 0: rho^-2 times the scalar-flat family metric.
GalleryEntry bergman_entry(double c);
/// (A drho^2 + sigma1^2 / A + 2 (rho + 2c)(sigma2^2 + sigma3^2)) / 4 with
/// A = (rho + 2c) / (rho + c).
GalleryEntry scalflat_entry(double c);

/// Closed-form complex structure with (1,0)-forms du + i sigma1 and
/// sigma2 + i sigma3, u = (rho + c) + c log(rho + c).
AlmostComplexField scalflat_complex_structure(ChartPtr chart, double c);
/// Kaehler form drho ^ sigma1 / 4 + (rho + 2c)/2 sigma2 ^ sigma3.
FormField scalflat_kahler_form(ChartPtr chart, double c);

/// Holomorphic coordinates (Re w1, Im w1, Re w2, Im w2) of the family.
Point scalflat_w_from_coords(const Point& p, double c);
/// Inverse map in jets; rho solved from u by Newton iteration when c > 0.
std::vector<Jet> scalflat_coords_from_w(std::span<const Jet> w, double c);
/// Chart on w with the domain rho > 0.
ChartPtr scalflat_w_chart(double c);
/// The family metric pulled back to the w chart.
MetricField scalflat_w_metric(double c);
/// |beta|^2 / A + 2 (rho + 2c) |dw1|^2 with beta = conj(w1) dw1 + i dw2 / 2
/// as a Hermitian metric on the w chart; it equals 4 times the family metric.
ComplexChartMetric scalflat_w_hermitian(double c);
/// Kaehler potential rho^2/2 (c = 0), (rho+c)^2 + 4c(rho+c) + 2c^2 log(rho+c) otherwise.
ScalarField scalflat_potential_w(double c);

// ---------------------------------------------------------------------------
// Flat hyperkaehler C^m + j C^m with real coordinates ordered
// (z_1, ..., z_m, w_1, ..., w_m), each complex coordinate as (x, y).

GalleryEntry flat_hk_entry(int m);
/// Rotation of the w factor, the circle action w -> e^{i t} w.
VectorField flat_hk_rotation(ChartPtr chart, int m);
/// mu = -|w|^2 / 2.
ScalarField flat_hk_moment(ChartPtr chart, int m);

/// Flat R^4 with a constant triple and no Killing field.
GalleryEntry flat4_entry();

// ---------------------------------------------------------------------------

/// |u|^2 > exp(-|z|^2 / 2).
bool siegel_stable(std::span<const std::complex<double>> z,
                   std::span<const std::complex<double>> w, std::complex<double> u);

}  // namespace ustar
