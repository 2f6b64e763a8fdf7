#include "ustar/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ustar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform(Rng& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

std::vector<std::string> labels(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

VectorField coordinate_field(ChartPtr chart, int index) {
  const int n = chart->dim;
  return vector_field(chart, [n, index](std::span<const Jet>) {
    std::vector<Jet> v(n, Jet(0.0));
    v[index] = Jet(1.0);
    return v;
  });
}

std::string format_c(double c) {
  std::ostringstream os;
  os << c;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Four-sphere

namespace {

ChartPtr s4_cartesian_chart() {
  return make_chart("s4.stereographic", {"y1", "y2", "y3", "y4"});
}

ChartPtr s4_rho_sigma_chart() {
  return make_chart("s4.rho_sigma", {"rho", "sigma", "phi", "theta"},
                    [](std::span<const double> x) { return x[0] > 0.0 && x[1] > 0.0; });
}

ChartPtr s4_uv_chart() {
  return make_chart("s4.uv", {"u", "v", "phi", "theta"}, [](std::span<const double> x) {
    return x[0] > 0.0 && 4.0 * x[0] * x[0] < 1.0;
  });
}

}  // namespace

MetricField s4_rho_sigma_metric() {
  return diagonal_metric(s4_rho_sigma_chart(), [](std::span<const Jet> x) {
    const Jet& rho = x[0];
    const Jet& sigma = x[1];
    const Jet f = pow(1.0 + rho * rho + sigma * sigma, -2.0);
    return std::vector<Jet>{f, f, f * rho * rho, f * sigma * sigma};
  });
}

MetricField s4_uv_metric() {
  return diagonal_metric(s4_uv_chart(), [](std::span<const Jet> x) {
    const Jet& u = x[0];
    const Jet& v = x[1];
    const Jet a = 1.0 - 4.0 * u * u;
    const Jet b = v * v + 4.0;
    return std::vector<Jet>{1.0 / a, a / (b * b), a / b, u * u};
  });
}

VectorField s4_rotation_cartesian(ChartPtr chart) {
  return vector_field(std::move(chart), [](std::span<const Jet> y) {
    return std::vector<Jet>{Jet(0.0), Jet(0.0), -y[3], y[2]};
  });
}

VectorField s4_rotation_angle(ChartPtr chart) { return coordinate_field(chart, 3); }

std::pair<double, double> s4_uv_from_rho_sigma(double rho, double sigma) {
  const double q = 1.0 + rho * rho + sigma * sigma;
  return {sigma / q, (rho * rho + sigma * sigma - 1.0) / rho};
}

Point s4_polar_from_cartesian(const Point& y) {
  return {std::hypot(y[0], y[1]), std::hypot(y[2], y[3]), std::atan2(y[1], y[0]),
          std::atan2(y[3], y[2])};
}

GalleryEntry s4_entry() {
  GalleryEntry e;
  e.id = "s4";
  e.description = "round four-sphere of curvature 4, stereographic chart";
  e.chart = s4_cartesian_chart();
  e.metric = metric_from_formula(e.chart, {4, 0}, [](std::span<const Jet> y) {
    const Jet f = pow(1.0 + y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3], -2.0);
    TensorJ g(4, 2);
    for (int i = 0; i < 4; ++i) g(i, i) = f;
    return g;
  });
  e.killing = s4_rotation_cartesian(e.chart);
  e.triple = coframe_triple(e.metric);
  e.alternate.emplace("s4.rho_sigma", s4_rho_sigma_metric());
  e.alternate.emplace("s4.uv", s4_uv_metric());
  e.sample = [](Rng& rng) {
    Point p(4);
    for (auto& c : p) c = uniform(rng, -1.5, 1.5);
    return p;
  };
  e.degenerate_points = [] {
    std::vector<Point> pts;
    for (int k = 0; k < 4; ++k) {
      const double t = 0.3 + 1.5 * k;
      pts.push_back({0.0, 0.0, std::cos(t), std::sin(t)});
    }
    return pts;
  };
  e.basepoint = {0.3, -0.2, 0.5, 0.4};
  return e;
}

MetricField s4_scalarflat_split_metric() {
  auto chart = make_chart("s4_scalarflat.split", {"x", "y", "phi", "theta"},
                          [](std::span<const double> x) {
                            return x[0] > 0.0 && std::abs(x[1]) < 0.5 * std::numbers::pi;
                          });
  return diagonal_metric(chart, [](std::span<const Jet> x) {
    const Jet s = 0.5 * (exp(2.0 * x[0]) - exp(-2.0 * x[0]));
    const Jet cy = cos(x[1]);
    return std::vector<Jet>{Jet(1.0), Jet(0.25), 0.25 * cy * cy, 0.25 * s * s};
  });
}

MetricField sphere_factor_metric() {
  auto chart = make_chart("sphere_factor", {"v", "phi"});
  return diagonal_metric(chart, [](std::span<const Jet> x) {
    const Jet b = x[0] * x[0] + 4.0;
    return std::vector<Jet>{1.0 / (b * b), 1.0 / b};
  });
}

MetricField hyperbolic_factor_metric() {
  auto chart = make_chart("hyperbolic_factor", {"u", "theta"}, [](std::span<const double> x) {
    return x[0] > 0.0 && 4.0 * x[0] * x[0] < 1.0;
  });
  return diagonal_metric(chart, [](std::span<const Jet> x) {
    const Jet a = 1.0 - 4.0 * x[0] * x[0];
    return std::vector<Jet>{1.0 / (a * a), x[0] * x[0] / a};
  });
}

GalleryEntry s4_scalarflat_entry() {
  GalleryEntry e;
  e.id = "s4_scalarflat";
  e.description = "scalar-flat Kaehler rescaling of the four-sphere off a circle";
  e.chart = s4_uv_chart();
  e.metric = diagonal_metric(e.chart, [](std::span<const Jet> x) {
    const Jet& u = x[0];
    const Jet& v = x[1];
    const Jet a = 1.0 - 4.0 * u * u;
    const Jet b = v * v + 4.0;
    return std::vector<Jet>{1.0 / (a * a), 1.0 / (b * b), 1.0 / b, u * u / a};
  });
  e.killing = s4_rotation_angle(e.chart);
  e.triple = coframe_triple(e.metric);
  // product of the rotations of the (u, theta) and (v, phi) factors
  e.complex_structure = AlmostComplexField(Field(e.chart, 2, JetFormula([](std::span<const Jet> x) {
    const Jet& u = x[0];
    const Jet a = 1.0 - 4.0 * u * u;
    const Jet b = x[1] * x[1] + 4.0;
    const Jet hyp = sqrt(a) / (a * u);  // sqrt(g_uu / g_theta theta)
    const Jet sph = 1.0 / sqrt(b);      // sqrt(g_vv / g_phi phi)
    TensorJ E(4, 2);
    E(3, 0) = hyp;
    E(0, 3) = -1.0 / hyp;
    E(2, 1) = sph;
    E(1, 2) = -1.0 / sph;
    return E;
  })));
  e.alternate.emplace("s4_scalarflat.split", s4_scalarflat_split_metric());
  e.sample = [](Rng& rng) {
    return Point{uniform(rng, 0.05, 0.45), uniform(rng, -3.0, 3.0), uniform(rng, 0.0, kTwoPi),
                 uniform(rng, 0.0, kTwoPi)};
  };
  e.basepoint = {0.25, 0.5, 1.0, 2.0};
  return e;
}

// ---------------------------------------------------------------------------
// Heisenberg-invariant metrics

namespace {

ChartPtr heisenberg_chart(const std::string& name) {
  return make_chart(name, {"rho", "x1", "x2", "x3"},
                    [](std::span<const double> x) { return x[0] > 0.0; });
}

std::function<Point(Rng&)> heisenberg_sampler() {
  return [](Rng& rng) {
    return Point{uniform(rng, 0.1, 10.0), uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0),
                 uniform(rng, -2.0, 2.0)};
  };
}

// Weights of (drho^2, sigma1^2, sigma2^2, sigma3^2) in 4 g-tilde.
std::vector<Jet> family_weights(const Jet& rho, double c) {
  const Jet A = (rho + 2.0 * c) / (rho + c);
  const Jet t = 2.0 * (rho + 2.0 * c);
  return {0.25 * A, 0.25 / A, 0.25 * t, 0.25 * t};
}

}  // namespace

TensorJ heisenberg_coframe(std::span<const Jet> x) {
  TensorJ C(4, 2);
  C(0, 0) = 1.0;
  C(1, 1) = 1.0;
  C(1, 3) = 2.0 * x[2];
  C(2, 2) = 1.0;
  C(3, 3) = 1.0;
  return C;
}

GalleryEntry bergman_entry(double c) {
  if (!(c >= 0.0)) throw GeometryError(ErrorKind::InvalidInput, "bergman_entry needs c >= 0");
  GalleryEntry e;
  e.id = c == 0.0 ? "bergman" : "bergman_c" + format_c(c);
  e.description = c == 0.0 ? "Bergman metric with Heisenberg symmetry"
                           : "quaternionic Kaehler deformation with constant " + format_c(c);
  e.chart = heisenberg_chart(e.id);
  e.metric = coframe_metric(e.chart, [c](std::span<const Jet> x) {
    auto w = family_weights(x[0], c);
    const Jet s = 1.0 / (x[0] * x[0]);
    for (auto& v : w) v = v * s;
    return std::make_pair(w, heisenberg_coframe(x));
  });
  e.killing = coordinate_field(e.chart, 1);
  e.triple = coframe_triple(e.metric);
  e.sample = heisenberg_sampler();
  e.basepoint = {1.0, 0.2, -0.3, 0.4};
  return e;
}

AlmostComplexField scalflat_complex_structure(ChartPtr chart, double c) {
  auto f = [c](std::span<const Jet> x) {
    const TensorJ C = heisenberg_coframe(x);
    const Jet A = (x[0] + 2.0 * c) / (x[0] + c);
    TensorJ M(4, 2);
    M(0, 1) = -1.0 / A;
    M(1, 0) = A;
    M(2, 3) = -1.0;
    M(3, 2) = 1.0;
    return matmul(inverse(C), matmul(M, C));
  };
  return AlmostComplexField(Field(std::move(chart), 2, JetFormula(f)));
}

FormField scalflat_kahler_form(ChartPtr chart, double c) {
  auto f = [c](std::span<const Jet> x) {
    const TensorJ C = heisenberg_coframe(x);
    TensorJ rows[4];
    for (int a = 0; a < 4; ++a) {
      rows[a] = TensorJ(4, 1);
      for (int i = 0; i < 4; ++i) rows[a](i) = C(a, i);
    }
    TensorJ w = wedge(rows[0], rows[1]);
    const TensorJ w23 = wedge(rows[2], rows[3]);
    const Jet s = 0.5 * (x[0] + 2.0 * c);
    for (std::size_t k = 0; k < w.size(); ++k) w.data()[k] = 0.25 * w.data()[k] + s * w23.data()[k];
    return w;
  };
  return FormField(Field(std::move(chart), 2, JetFormula(f)));
}

GalleryEntry scalflat_entry(double c) {
  if (!(c >= 0.0)) throw GeometryError(ErrorKind::InvalidInput, "scalflat_entry needs c >= 0");
  GalleryEntry e;
  e.id = c == 0.0 ? "scalflat" : "scalflat_c" + format_c(c);
  e.description = "scalar-flat Kaehler metric with Heisenberg symmetry, constant " + format_c(c);
  e.chart = heisenberg_chart(e.id);
  e.metric = coframe_metric(e.chart, [c](std::span<const Jet> x) {
    return std::make_pair(family_weights(x[0], c), heisenberg_coframe(x));
  });
  e.killing = coordinate_field(e.chart, 1);
  e.triple = coframe_triple(e.metric);
  e.complex_structure = scalflat_complex_structure(e.chart, c);
  e.alternate.emplace("w", scalflat_w_metric(c));
  e.sample = heisenberg_sampler();
  e.basepoint = {1.0, 0.2, -0.3, 0.4};
  return e;
}

namespace {
double u_of_rho(double rho, double c) {
  return c == 0.0 ? rho : (rho + c) + c * std::log(rho + c);
}
}  // namespace

Point scalflat_w_from_coords(const Point& p, double c) {
  const double u = u_of_rho(p[0], c);
  const double x1 = p[1], x2 = p[2], x3 = p[3];
  return {x2, x3, 2.0 * (x1 + x2 * x3), x2 * x2 + x3 * x3 - 2.0 * u};
}

std::vector<Jet> scalflat_coords_from_w(std::span<const Jet> w, double c) {
  const Jet u = 0.5 * (w[0] * w[0] + w[1] * w[1] - w[3]);
  Jet rho = u;
  if (c > 0.0) {
    // Newton on (rho + c) + c log(rho + c) = u, first on values, then on jets.
    const double target = u.value();
    double r = std::max(target - c, 1e-3);
    for (int it = 0; it < 100; ++it) {
      const double f = u_of_rho(r, c) - target;
      const double step = f / (1.0 + c / (r + c));
      r = std::max(r - step, 0.5 * (r + c) - c);
      if (std::abs(step) <= 1e-16 * (1.0 + std::abs(r))) break;
    }
    rho = Jet(r);
    for (int it = 0; it <= u.order() + 1; ++it) {
      const Jet f = (rho + c) + c * log(rho + c) - u;
      rho = rho - f / (1.0 + c / (rho + c));
    }
  }
  return {rho, 0.5 * w[2] - w[0] * w[1], w[0], w[1]};
}

ChartPtr scalflat_w_chart(double c) {
  const double floor = c == 0.0 ? 0.0 : u_of_rho(0.0, c);
  return make_chart("scalflat.w", {"re_w1", "im_w1", "re_w2", "im_w2"},
                    [floor](std::span<const double> w) {
                      return 0.5 * (w[0] * w[0] + w[1] * w[1] - w[3]) > floor;
                    });
}

MetricField scalflat_w_metric(double c) {
  auto base = heisenberg_chart("scalflat");
  auto g = coframe_metric(base, [c](std::span<const Jet> x) {
    return std::make_pair(family_weights(x[0], c), heisenberg_coframe(x));
  });
  return pullback_metric(g, scalflat_w_chart(c),
                         [c](std::span<const Jet> w) { return scalflat_coords_from_w(w, c); });
}

ComplexChartMetric scalflat_w_hermitian(double c) {
  ComplexChartMetric h;
  h.chart = scalflat_w_chart(c);
  h.m = 2;
  h.h = [c](std::span<const Jet> w) {
    const auto x = scalflat_coords_from_w(w, c);
    const Jet& rho = x[0];
    const Jet A = (rho + 2.0 * c) / (rho + c);
    // b = (conj(w1), i/2)
    const Jet br[2] = {w[0], Jet(0.0)};
    const Jet bi[2] = {-w[1], Jet(0.5)};
    TensorJ re(2, 2), im(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        // b_a conj(b_b)
        re(a, b) = (br[a] * br[b] + bi[a] * bi[b]) / A;
        im(a, b) = (bi[a] * br[b] - br[a] * bi[b]) / A;
      }
    re(0, 0) += 2.0 * (rho + 2.0 * c);
    return std::make_pair(re, im);
  };
  return h;
}

ScalarField scalflat_potential_w(double c) {
  return scalar_field(scalflat_w_chart(c), [c](std::span<const Jet> w) {
    const Jet rho = scalflat_coords_from_w(w, c)[0];
    if (c == 0.0) return 0.5 * rho * rho;
    const Jet r = rho + c;
    return r * r + 4.0 * c * r + 2.0 * c * c * log(r);
  });
}

// ---------------------------------------------------------------------------
// Flat hyperkaehler space

namespace {

std::array<TensorD, 3> flat_hk_forms(int m) {
  const int n = 4 * m;
  std::array<TensorD, 3> w = {TensorD(n, 2), TensorD(n, 2), TensorD(n, 2)};
  auto put = [](TensorD& t, int i, int j, double v) {
    t(i, j) += v;
    t(j, i) -= v;
  };
  for (int a = 0; a < m; ++a) {
    const int zx = 2 * a, zy = 2 * a + 1, wx = 2 * m + 2 * a, wy = 2 * m + 2 * a + 1;
    put(w[0], zx, zy, 1.0);
    put(w[0], wx, wy, 1.0);
    put(w[1], zx, wx, 1.0);
    put(w[1], zy, wy, -1.0);
    put(w[2], zx, wy, 1.0);
    put(w[2], zy, wx, 1.0);
  }
  return w;
}

}  // namespace

VectorField flat_hk_rotation(ChartPtr chart, int m) {
  return vector_field(std::move(chart), [m](std::span<const Jet> x) {
    std::vector<Jet> v(4 * m, Jet(0.0));
    for (int a = 0; a < m; ++a) {
      const int wx = 2 * m + 2 * a, wy = wx + 1;
      v[wx] = -x[wy];
      v[wy] = x[wx];
    }
    return v;
  });
}

ScalarField flat_hk_moment(ChartPtr chart, int m) {
  return scalar_field(std::move(chart), [m](std::span<const Jet> x) {
    Jet s(0.0);
    for (int k = 2 * m; k < 4 * m; ++k) s += x[k] * x[k];
    return -0.5 * s;
  });
}

GalleryEntry flat_hk_entry(int m) {
  if (m < 1) throw GeometryError(ErrorKind::InvalidInput, "flat_hk_entry needs m >= 1");
  GalleryEntry e;
  e.id = "flat_hk_" + std::to_string(m);
  e.description = "flat hyperkaehler space C^" + std::to_string(m) + " + j C^" + std::to_string(m);
  std::vector<std::string> names;
  for (int a = 1; a <= m; ++a) {
    names.push_back("re_z" + std::to_string(a));
    names.push_back("im_z" + std::to_string(a));
  }
  for (int a = 1; a <= m; ++a) {
    names.push_back("re_w" + std::to_string(a));
    names.push_back("im_w" + std::to_string(a));
  }
  e.chart = make_chart(e.id, names);
  e.metric = euclidean_metric(e.chart);
  const auto forms = flat_hk_forms(m);
  const TensorD id = identity<double>(4 * m);
  std::array<TensorD, 3> ends;
  for (int i = 0; i < 3; ++i) ends[i] = endomorphism_from_form(id, forms[i]);
  e.triple = constant_triple(e.chart, ends);
  e.kahler_forms = std::array<FormField, 3>{constant_form(e.chart, forms[0]),
                                            constant_form(e.chart, forms[1]),
                                            constant_form(e.chart, forms[2])};
  e.complex_structure = constant_complex_structure(e.chart, ends[0]);
  e.killing = flat_hk_rotation(e.chart, m);
  e.quaternionic_dim = m;
  e.sample = [m](Rng& rng) {
    Point p(4 * m);
    for (auto& c : p) c = uniform(rng, -2.0, 2.0);
    return p;
  };
  e.basepoint = Point(4 * m, 0.3);
  return e;
}

GalleryEntry flat4_entry() {
  GalleryEntry e;
  e.id = "flat4";
  e.description = "flat R^4 with a constant quaternionic triple";
  e.chart = make_chart("flat4", labels("x", 4));
  e.metric = euclidean_metric(e.chart);
  e.triple = coframe_triple(e.metric);
  e.sample = [](Rng& rng) {
    Point p(4);
    for (auto& c : p) c = uniform(rng, -2.0, 2.0);
    return p;
  };
  e.basepoint = {0.1, 0.2, 0.3, 0.4};
  return e;
}

// ---------------------------------------------------------------------------

std::vector<std::string> gallery_ids() {
  return {"s4",          "s4_scalarflat", "bergman",   "bergman_c1", "scalflat",
          "scalflat_c0.5", "scalflat_c1",  "scalflat_c2", "flat_hk_1", "flat_hk_2",
          "flat_hk_3",   "flat4"};
}

GalleryEntry make_entry(const std::string& id) {
  auto parse_c = [&](const std::string& prefix) -> std::optional<double> {
    if (id == prefix) return 0.0;
    if (id.rfind(prefix + "_c", 0) != 0) return std::nullopt;
    try {
      std::size_t used = 0;
      const std::string rest = id.substr(prefix.size() + 2);
      const double c = std::stod(rest, &used);
      if (used != rest.size() || !(c >= 0.0)) return std::nullopt;
      return c;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  if (id == "s4") return s4_entry();
  if (id == "s4_scalarflat") return s4_scalarflat_entry();
  if (id == "flat4") return flat4_entry();
  if (auto c = parse_c("bergman")) return bergman_entry(*c);
  if (auto c = parse_c("scalflat")) return scalflat_entry(*c);
  if (id.rfind("flat_hk_", 0) == 0) {
    const std::string rest = id.substr(8);
    if (!rest.empty() && rest.size() < 3 &&
        rest.find_first_not_of("0123456789") == std::string::npos) {
      const int m = std::stoi(rest);
      if (m >= 1 && m <= 8) return flat_hk_entry(m);
    }
  }
  throw GeometryError(ErrorKind::UnknownEntry, "no gallery entry '" + id + "'");
}

std::vector<std::string> self_test(const GalleryEntry& e, std::uint64_t seed) {
  std::vector<std::string> failed;
  Rng rng(seed);
  auto fail = [&](const std::string& name) {
    if (std::find(failed.begin(), failed.end(), name) == failed.end()) failed.push_back(name);
  };
  for (int k = 0; k < 3; ++k) {
    const Point x = e.sample(rng);
    const TensorD G = e.metric.value(x);
    if (max_abs_diff(G, transpose(G)) > 0.0) fail("metric_symmetric");
    const Signature s = signature_of(G);
    if (s.positive != e.metric.signature.positive || s.negative != e.metric.signature.negative) {
      fail("metric_signature");
    }
    try {
      require_nondegenerate(G);
    } catch (const GeometryError&) {
      fail("metric_nondegenerate");
    }
    if (e.killing && killing_residual(e.metric, *e.killing, x) > 1e-9) fail("killing");
    if (e.triple) {
      const auto q = e.triple->value(x);
      if (quaternion_relation_residual(q) > 1e-10) fail("quaternion_relations");
      if (isometry_residual(G, q) > 1e-10) fail("triple_isometry");
    }
    if (e.kahler_forms) {
      for (const auto& w : *e.kahler_forms) {
        if (max_abs(ext_d(w, x)) > 1e-8) fail("kahler_forms_closed");
      }
    }
    if (e.complex_structure) {
      const auto r = kahler_check(e.metric, *e.complex_structure, x);
      if (r.hermitian > 1e-7 || r.closure > 1e-7) fail("kahler");
    }
  }
  return failed;
}

bool siegel_stable(std::span<const std::complex<double>> z,
                   std::span<const std::complex<double>> w, std::complex<double> u) {
  double w2 = 0.0;
  for (const auto& v : w) w2 += std::norm(v);
  if (w2 == 0.0) throw GeometryError(ErrorKind::DomainViolation, "siegel_stable needs w != 0");
  double z2 = 0.0;
  for (const auto& v : z) z2 += std::norm(v);
  return std::norm(u) > std::exp(-0.5 * z2);
}

}  // namespace ustar
