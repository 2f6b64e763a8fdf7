#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "doctest.h"
#include "oracle.hpp"
#include "ustar/gallery.hpp"
#include "ustar/qk2ustar.hpp"

using namespace ustar;

namespace {

std::vector<Point> samples_of(const GalleryEntry& e, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back(e.sample(rng));
  return pts;
}

std::vector<Point> uv_samples(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.02, 0.48), v(-3.0, 3.0), a(-3.0, 3.0);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({u(rng), v(rng), a(rng), a(rng)});
  return pts;
}

double max_abs_diff_d(const TensorD& a, const TensorD& b) { return max_abs_diff(a, b); }

TensorD closed_form_dx_plus_uv(const Point& p) {
  const double u = p[0], v = p[1];
  const double f = std::pow(1.0 - 4.0 * u * u, 1.5) / std::pow(v * v + 4.0, 1.5);
  TensorD w(4, 2);
  // u du ^ dtheta + f dv ^ dphi, chart order (u, v, phi, theta)
  w(0, 3) = u;
  w(3, 0) = -u;
  w(1, 2) = f;
  w(2, 1) = -f;
  return w;
}

TensorD closed_form_dx_plus_bergman(const Point& p) {
  const double rho = p[0], x2 = p[2];
  // rows of drho, sigma1, sigma2, sigma3
  TensorD e(4, 2);
  e(0, 0) = 1.0;
  e(1, 1) = 1.0;
  e(1, 3) = 2.0 * x2;
  e(2, 2) = 1.0;
  e(3, 3) = 1.0;
  TensorD w(4, 2);
  const double a = -1.0 / (8.0 * rho * rho * rho), b = -1.0 / (4.0 * rho * rho);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      w(i, j) = a * (e(0, i) * e(1, j) - e(0, j) * e(1, i)) +
                b * (e(2, i) * e(3, j) - e(2, j) * e(3, i));
  return w;
}

}  // namespace

TEST_CASE("self-dual part of dX-flat matches the closed forms") {
  const MetricField g = s4_uv_metric();
  const MomentSection4d raw(g, s4_rotation_angle(g.chart_ptr()));
  for (const Point& p : uv_samples(30, 3)) {
    CHECK(max_abs_diff_d(values(raw.self_dual_dx(p, 0)), closed_form_dx_plus_uv(p)) <= 1e-8);
    // mu ^ mu / 2 = (1 - 4u^2) vol
    const TensorD mu = values(raw.self_dual_dx(p, 0));
    const double lhs = 0.5 * top_coefficient(wedge(mu, mu));
    const double vol = std::sqrt(determinant(g.value(p)));
    CHECK(std::abs(lhs - (1.0 - 4.0 * p[0] * p[0]) * vol) <= 1e-7);
  }
  const GalleryEntry b = make_entry("bergman");
  const MomentSection4d rawb(b.metric, *b.killing);
  for (const Point& p : samples_of(b, 30, 4)) {
    const TensorD got = values(rawb.self_dual_dx(p, 0));
    CHECK(max_abs_diff_d(got, closed_form_dx_plus_bergman(p)) <= 1e-8 * std::max(1.0, max_abs(got)));
  }
}

TEST_CASE("calibration constants") {
  const MetricField g = s4_uv_metric();
  const auto pts = uv_samples(20, 5);
  const Calibration c = calibrate_moment(g, s4_rotation_angle(g.chart_ptr()), pts);
  CHECK(c.residual <= 1e-8);
  CHECK(std::abs(std::abs(c.k) - 0.25) <= 1e-9);

  const GalleryEntry b = make_entry("bergman");
  const Calibration cb = calibrate_moment(b.metric, *b.killing, samples_of(b, 20, 6));
  CHECK(cb.residual <= 1e-8);
  CHECK(std::abs(std::abs(cb.k) - 0.5) <= 1e-9);

  const GalleryEntry s = make_entry("s4");
  const Calibration cs = calibrate_moment(s.metric, *s.killing, samples_of(s, 20, 7));
  CHECK(cs.residual <= 1e-8);
  CHECK(std::abs(std::abs(cs.k) - 0.25) <= 1e-9);
}

TEST_CASE("moment section errors") {
  const GalleryEntry s = make_entry("s4");
  const auto pts = samples_of(s, 5, 8);
  const VectorField zero = vector_field(s.chart, [](std::span<const Jet>) {
    return std::vector<Jet>(4, Jet(0.0));
  });
  const MomentSection4d ms(s.metric, zero, 1.0);
  CHECK_THROWS_AS(ms.mu1(pts[0], 0), GeometryError);
  try {
    ms.mu1(pts[0], 0);
  } catch (const GeometryError& e) {
    CHECK(e.kind() == ErrorKind::ZeroMoment);
  }
  const VectorField radial = vector_field(s.chart, [](std::span<const Jet> y) {
    return std::vector<Jet>(y.begin(), y.end());
  });
  try {
    moment_section_4d(s.metric, radial, pts);
    FAIL("expected NotKilling");
  } catch (const GeometryError& e) {
    CHECK(e.kind() == ErrorKind::NotKilling);
  }
  const MomentSection4d cal = moment_section_4d(s.metric, *s.killing, pts);
  for (const Point& p : s.degenerate_points()) {
    CHECK_THROWS_AS(cal.mu1(p, 0), GeometryError);
  }
}

TEST_CASE("moment equations hold in the rotated frame") {
  for (const std::string id : {"s4", "bergman", "bergman_c1"}) {
    CAPTURE(id);
    const GalleryEntry e = make_entry(id);
    const auto pts = samples_of(e, 20, 9);
    const MomentSection4d ms = moment_section_4d(e.metric, *e.killing, pts);
    for (const Point& p : pts) {
      const auto r = moment_equation_residuals(ms, p);
      const double scale = std::max(1.0, ms.mu1(p, 0).value());
      CHECK(r.dmu1 <= 1e-6 * scale);
      CHECK(r.theta2 <= 1e-6 * scale);
      CHECK(r.theta3 <= 1e-6 * scale);
      CHECK(r.covariant <= 1e-6 * scale);
      // the components reassemble mu1
      const auto c = ms.components(p, 0);
      const double len = std::sqrt(c[0].value() * c[0].value() + c[1].value() * c[1].value() +
                                   c[2].value() * c[2].value());
      CHECK(len == doctest::Approx(ms.mu1(p, 0).value()).epsilon(1e-10));
    }
  }
}

TEST_CASE("alpha by differentiation and algebraically agree") {
  for (const std::string id : {"s4", "bergman", "bergman_c2"}) {
    CAPTURE(id);
    const GalleryEntry e = make_entry(id);
    const auto pts = samples_of(e, 20, 10);
    const MomentSection4d ms = moment_section_4d(e.metric, *e.killing, pts);
    for (const Point& p : pts) {
      const TensorD a = values(alpha_from_moment(ms, p, 0));
      CHECK(max_abs_diff(a, alpha_algebraic(ms, p)) <= 1e-7 * std::max(1.0, max_abs(a)));
    }
  }
  // Bergman: mu1 proportional to 1/rho, so alpha = d log(rho) / 2
  const GalleryEntry b = make_entry("bergman");
  const auto pts = samples_of(b, 10, 11);
  const MomentSection4d ms = moment_section_4d(b.metric, *b.killing, pts);
  for (const Point& p : pts) {
    const TensorD a = values(alpha_from_moment(ms, p, 0));
    CHECK(a(0) == doctest::Approx(0.5 / p[0]).epsilon(1e-9));
    CHECK(std::abs(a(1)) + std::abs(a(2)) + std::abs(a(3)) <= 1e-9);
  }
  // constant mu1 gives alpha = 0: flat R^4 with a rotation of both planes
  const GalleryEntry f = make_entry("flat4");
  const VectorField rot = vector_field(f.chart, [](std::span<const Jet> x) {
    return std::vector<Jet>{-x[1], x[0], -x[3], x[2]};
  });
  const MomentSection4d msf(f.metric, rot, 1.0);
  const TensorD a0 = values(alpha_from_moment(msf, {0.3, 0.1, -0.7, 0.2}, 0));
  CHECK(max_abs(a0) <= 1e-14);
}

TEST_CASE("modification tensor: symmetry, zero alpha and trace constant") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  for (int m = 1; m <= 3; ++m) {
    CAPTURE(m);
    const GalleryEntry e = make_entry("flat_hk_" + std::to_string(m));
    const auto q = e.triple->value(Point(4 * m, 0.0));
    for (int trial = 0; trial < 10; ++trial) {
      TensorD a(4 * m, 1);
      for (auto& v : a.data()) v = nd(rng);
      const TensorD S = modification_tensor(a, q);
      double asym = 0.0;
      for (int k = 0; k < 4 * m; ++k)
        for (int i = 0; i < 4 * m; ++i)
          for (int j = 0; j < 4 * m; ++j) asym = std::max(asym, std::abs(S(k, i, j) - S(k, j, i)));
      CHECK(asym == 0.0);
      CHECK(modification_trace_residual(S, a) <= 1e-10);
    }
    const TensorD S0 = modification_tensor(TensorD(4 * m, 1), q);
    CHECK(max_abs(S0) == 0.0);
  }
  // alpha = dx1 on flat R^4: trace over Y is 8 alpha
  const GalleryEntry f = make_entry("flat4");
  TensorD a(4, 1);
  a(0) = 1.0;
  const TensorD S = modification_tensor(a, f.triple->value({0, 0, 0, 0}));
  for (int i = 0; i < 4; ++i) {
    double tr = 0.0;
    for (int j = 0; j < 4; ++j) tr += S(j, i, j);
    CHECK(tr == doctest::Approx(8.0 * a(i)));
  }
}

TEST_CASE("verify_ustar on the four-sphere and Bergman constructions") {
  for (const std::string id : {"s4", "bergman"}) {
    CAPTURE(id);
    const GalleryEntry e = make_entry(id);
    const auto cal = samples_of(e, 10, 13);
    const UStarConstruction c = qk_to_ustar(e.metric, *e.killing, cal);
    const Report rep = verify_ustar(c, samples_of(e, 50, 14));
    for (const Check& ch : rep.checks) {
      CAPTURE(ch.name);
      CAPTURE(ch.max_residual);
      CHECK(ch.pass);
    }
    CHECK(rep.all_pass());
  }
  // the uv chart of S^4, with mu1 = sqrt(1 - 4u^2) / 4
  const MetricField g = s4_uv_metric();
  const auto pts = uv_samples(50, 15);
  const UStarConstruction c = qk_to_ustar(g, s4_rotation_angle(g.chart_ptr()), pts);
  CHECK(verify_ustar(c, pts).all_pass());
  for (const Point& p : pts) {
    CHECK(c.mu1.eval_scalar(p, 0).value() ==
          doctest::Approx(std::sqrt(1.0 - 4.0 * p[0] * p[0]) / 4.0).epsilon(1e-10));
  }
}

TEST_CASE("verify_ustar skips the zero set and reports failures of plain Levi-Civita") {
  const GalleryEntry e = make_entry("s4");
  const UStarConstruction c = qk_to_ustar(e.metric, *e.killing, samples_of(e, 10, 16));
  auto pts = samples_of(e, 5, 17);
  for (const Point& p : e.degenerate_points()) pts.push_back(p);
  const Report rep = verify_ustar(c, pts);
  CHECK(std::get<long long>(*rep.meta_value("skipped_zero_moment")) ==
        static_cast<long long>(e.degenerate_points().size()));
  CHECK(rep.all_pass());

  UStarConstruction plain = c;
  plain.connection = levi_civita(e.metric);
  const Report bad = verify_ustar(plain, samples_of(e, 20, 18));
  CHECK_FALSE(bad.all_pass());
  double worst = 0.0;
  for (const Point& p : samples_of(e, 20, 18)) {
    worst = std::max(worst, parallel_residual(plain.connection, plain.I, p));
  }
  CHECK(worst > 1e-3);
}

TEST_CASE("m = 1: modified connection is Levi-Civita of the rescaled metric") {
  for (const std::string id : {"s4", "bergman", "bergman_c0.5"}) {
    CAPTURE(id);
    const GalleryEntry e = make_entry(id);
    const auto pts = samples_of(e, 20, 19);
    const UStarConstruction c = qk_to_ustar(e.metric, *e.killing, pts);
    const MetricField gt = rescaled_metric(e.metric, c.mu1);
    const ConnectionField lc = levi_civita(gt);
    for (const Point& p : pts) {
      const TensorD a = c.connection.value(p);
      CHECK(max_abs_diff(a, lc.value(p)) <= 1e-6 * std::max(1.0, max_abs(a)));
      // independent finite-difference Christoffels of mu1^-2 g
      CHECK(oracle::relative_error(a, oracle::christoffel(gt, p)) <= 1e-6);
      CHECK(nijenhuis(c.I, p) <= 1e-6);
      const auto k = kahler_check(gt, c.I, p);
      CHECK(k.hermitian <= 1e-9);
      CHECK(k.closure <= 1e-6 * std::max(1.0, max_abs(gt.value(p))));
      CHECK(std::abs(ricci_scalar(gt, p)) <= 1e-6);
    }
  }
}

TEST_CASE("rescaled Bergman metric is the scalar-flat metric up to a constant") {
  const GalleryEntry b = make_entry("bergman");
  const GalleryEntry s = make_entry("scalflat");
  const auto pts = samples_of(b, 20, 20);
  const UStarConstruction c = qk_to_ustar(b.metric, *b.killing, pts);
  const MetricField gt = rescaled_metric(b.metric, c.mu1);
  double ratio = 0.0;
  for (const Point& p : pts) {
    const TensorD lhs = gt.value(p), rhs = s.metric.value(p);
    if (ratio == 0.0) ratio = lhs(0, 0) / rhs(0, 0);
    TensorD scaled = rhs;
    for (auto& v : scaled.data()) v *= ratio;
    CHECK(max_abs_diff(lhs, scaled) <= 1e-9 * max_abs(lhs));
  }
  CHECK(ratio == doctest::Approx(16.0));
}

TEST_CASE("constant frame rotation leaves the modified connection unchanged") {
  const GalleryEntry e = make_entry("bergman");
  const auto pts = samples_of(e, 10, 21);
  const MomentSection4d ms = moment_section_4d(e.metric, *e.killing, pts);
  const OneFormEvaluator alpha = [ms](const Point& x, int order) {
    return alpha_from_moment(ms, x, order);
  };
  const ConnectionField lc = levi_civita(e.metric);
  const QuaternionicTriple t = coframe_triple(e.metric);
  const Eigen::Matrix3d R =
      (Eigen::AngleAxisd(0.4, Eigen::Vector3d::UnitZ()) *
       Eigen::AngleAxisd(-1.1, Eigen::Vector3d(1, 2, 3).normalized()))
          .toRotationMatrix();
  std::array<double, 9> Ra;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) Ra[i * 3 + j] = R(i, j);
  const ConnectionField a = modified_connection(lc, alpha, t);
  const ConnectionField b = modified_connection(lc, alpha, rotated_triple(t, Ra));
  for (const Point& p : pts) {
    const TensorD va = a.value(p);
    CHECK(quaternion_relation_residual(rotated_triple(t, Ra).value(p)) <= 1e-12);
    CHECK(max_abs_diff(va, b.value(p)) <= 1e-8 * std::max(1.0, max_abs(va)));
    CHECK(torsion_residual(a, p) == 0.0);
  }
}
