#include <cmath>
#include <random>

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

TensorD elementary(int n, int i, int j) {
  TensorD w(n, 2);
  w(i, j) = 1.0;
  w(j, i) = -1.0;
  return w;
}

// (J^* w)(X, Y) = w(JX, JY)
TensorD pull_by(const TensorD& w, const TensorD& J) {
  const int n = w.dim();
  TensorD out(n, 2);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = 0.0;
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) s += J(c, a) * J(d, b) * w(c, d);
      out(a, b) = s;
    }
  return out;
}

TensorD average_type11(const TensorD& w, const TensorD& J) {
  TensorD p = pull_by(w, J);
  for (std::size_t k = 0; k < p.size(); ++k) p.data()[k] = 0.5 * (p.data()[k] + w.data()[k]);
  return p;
}

// Ric(J., .) from the finite-difference curvature oracle
TensorD ricci_form_oracle(const MetricField& g, const TensorD& J, const Point& x) {
  const TensorD R = oracle::riemann(g, x);
  const int n = g.dim();
  TensorD ric(n, 2), rho(n, 2);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i) ric(j, l) += R(i, j, i, l);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) rho(a, b) += J(c, a) * ric(c, b);
  return rho;
}

std::vector<Point> w_points(double c, int n, std::uint64_t seed) {
  const GalleryEntry e = make_entry("scalflat");
  std::vector<Point> pts;
  for (const Point& p : samples_of(e, n, seed)) pts.push_back(scalflat_w_from_coords(p, c));
  return pts;
}

}  // namespace

TEST_CASE("Nijenhuis tensor") {
  const GalleryEntry f = make_entry("flat4");
  const TensorD J0 = standard_complex_structure(4);
  CHECK(nijenhuis(constant_complex_structure(f.chart, J0), {0.1, 0.2, 0.3, 0.4}) == 0.0);

  // J0 + 0.1 x1 E with E mixing the two complex lines
  const AlmostComplexField bent(Field(f.chart, 2, JetFormula([J0](std::span<const Jet> x) {
    TensorJ J(4, 2);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) J(a, b) = Jet(J0(a, b));
    J(2, 0) = J(2, 0) + 0.1 * x[0];
    J(0, 3) = J(0, 3) + 0.1 * x[0];
    return J;
  })));
  const double bent_n = nijenhuis(bent, {0.3, -0.2, 0.5, 0.1});
  MESSAGE("perturbed Nijenhuis norm " << bent_n);
  CHECK(bent_n > 1e-3);

  const GalleryEntry s = make_entry("s4");
  const auto pts = samples_of(s, 20, 1);
  const MomentSection4d ms = moment_section_4d(s.metric, *s.killing, pts);
  const AlmostComplexField I = ms.complex_structure();
  for (const Point& p : pts) CHECK(nijenhuis(I, p) <= 1e-6);

  for (const std::string id : {"scalflat", "scalflat_c1"}) {
    const GalleryEntry e = make_entry(id);
    for (const Point& p : samples_of(e, 10, 2)) CHECK(nijenhuis(*e.complex_structure, p) <= 1e-8);
  }
}

TEST_CASE("Kaehler check") {
  const GalleryEntry hk = make_entry("flat_hk_1");
  const auto r = kahler_check(hk.metric, *hk.complex_structure, {0.1, 0.2, -0.3, 0.7});
  CHECK(r.hermitian <= 1e-12);
  CHECK(r.closure <= 1e-12);

  // scalar-flat metric with I from the Bergman moment section, and with the closed form
  const GalleryEntry b = make_entry("bergman");
  const GalleryEntry s = make_entry("scalflat");
  const auto pts = samples_of(b, 20, 3);
  const MomentSection4d ms = moment_section_4d(b.metric, *b.killing, pts);
  const AlmostComplexField I = ms.complex_structure();
  for (const Point& p : pts) {
    const auto a = kahler_check(s.metric, I, p);
    CHECK(a.hermitian <= 1e-7);
    CHECK(a.closure <= 1e-7);
    CHECK(max_abs_diff(I.value(p), s.complex_structure->value(p)) <= 1e-9);
    const auto bad = kahler_check(b.metric, I, p);
    CHECK(bad.hermitian <= 1e-7);
  }
  const auto at_one = kahler_check(b.metric, I, {1.0, 0.0, 0.0, 0.0});
  MESSAGE("Bergman closure residual at rho = 1: " << at_one.closure);
  // d(rho^-2 w-tilde) = -rho^-2 drho ^ sigma2 ^ sigma3
  CHECK(at_one.closure == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("type (1,1) test") {
  const GalleryEntry hk = make_entry("flat_hk_1");
  const auto q = hk.triple->value(Point(4, 0.0));
  const TensorD w1 = form_from_endomorphism(identity<double>(4), q[0]);
  CHECK(type11_test(w1, q[0]) <= 1e-10);
  CHECK(type11_test(w1, q[1]) == doctest::Approx(2.0 * max_abs(w1)));
  CHECK(type11_test(w1, q[2]) == doctest::Approx(2.0 * max_abs(w1)));
}

TEST_CASE("Hodge star in dimension four") {
  const TensorD id = identity<double>(4);
  CHECK(max_abs_diff(hodge_star_4d(id, elementary(4, 0, 1)), elementary(4, 2, 3)) == 0.0);
  CHECK(max_abs_diff(hodge_star_4d(id, elementary(4, 0, 2)), elementary(4, 3, 1)) == 0.0);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  const GalleryEntry b = make_entry("bergman");
  for (const Point& p : samples_of(b, 20, 5)) {
    const TensorD G = b.metric.value(p);
    TensorD w(4, 2);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        w(i, j) = nd(rng);
        w(j, i) = -w(i, j);
      }
    CHECK(max_abs_diff(hodge_star_4d(G, hodge_star_4d(G, w)), w) <= 1e-12 * max_abs(w) * 1e3);
    const auto [plus, minus] = sd_split(G, w);
    TensorD sum = plus;
    for (std::size_t k = 0; k < sum.size(); ++k) sum.data()[k] += minus.data()[k];
    CHECK(max_abs_diff(sum, w) <= 1e-15 * 1e3);
    CHECK(max_abs_diff(hodge_star_4d(G, plus), plus) <= 1e-10 * max_abs(w));

    // *(drho ^ sigma1) = 2 rho sigma2 ^ sigma3
    const double rho = p[0], x2 = p[2];
    TensorD dr(4, 1), s1(4, 1), s2(4, 1), s3(4, 1);
    dr(0) = 1.0;
    s1(1) = 1.0;
    s1(3) = 2.0 * x2;
    s2(2) = 1.0;
    s3(3) = 1.0;
    TensorD rhs = wedge(s2, s3);
    for (auto& v : rhs.data()) v *= 2.0 * rho;
    CHECK(max_abs_diff(hodge_star_4d(G, wedge(dr, s1)), rhs) <= 1e-10 * std::max(1.0, max_abs(rhs)));
  }
}

TEST_CASE("triple forms span the self-dual forms") {
  for (const std::string id : {"s4", "bergman", "scalflat_c1", "flat4"}) {
    CAPTURE(id);
    const GalleryEntry e = make_entry(id);
    for (const Point& p : samples_of(e, 10, 6)) {
      const TensorD G = e.metric.value(p);
      const auto q = e.triple->value(p);
      for (int i = 0; i < 3; ++i) {
        const TensorD w = form_from_endomorphism(G, q[i]);
        CHECK(max_abs(sd_split(G, w).second) <= 1e-8 * max_abs(w));
        CHECK(top_coefficient(wedge(w, w)) > 0.0);
      }
      // three orthogonal forms of norm^2 = 2 span a 3-dimensional space
      const TensorD ginv = inverse(G);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double ip = form_inner(ginv, form_from_endomorphism(G, q[i]),
                                       form_from_endomorphism(G, q[j]));
          CHECK(ip == doctest::Approx(i == j ? 2.0 : 0.0).epsilon(1e-9).scale(1.0));
        }
    }
  }
}

TEST_CASE("forms of type (1,1) for two structures") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  const GalleryEntry e = make_entry("bergman");
  int checked = 0;
  for (const Point& p : samples_of(e, 50, 8)) {
    const TensorD G = e.metric.value(p), ginv = inverse(G);
    const auto q = e.triple->value(p);
    TensorD w(4, 2);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        w(i, j) = nd(rng) * max_abs(G);
        w(j, i) = -w(i, j);
      }
    const TensorD wj = average_type11(w, q[1]);
    const TensorD wjk = average_type11(wj, q[2]);
    const double scale = std::max(1e-300, max_abs(w));
    CHECK(type11_test(wjk, q[1]) <= 1e-10 * scale);
    CHECK(type11_test(wjk, q[2]) <= 1e-10 * scale);
    // the self-dual part lies along w1 (here it even vanishes)
    const TensorD w1 = form_from_endomorphism(G, q[0]);
    TensorD plus = sd_split(G, wjk).first;
    const double along = form_inner(ginv, plus, w1) / 2.0;
    for (std::size_t k = 0; k < plus.size(); ++k) plus.data()[k] -= along * w1.data()[k];
    CHECK(max_abs(plus) <= 1e-9 * scale);
    // one structure: self-dual part along w2 only
    TensorD pj = sd_split(G, wj).first;
    const TensorD w2 = form_from_endomorphism(G, q[1]);
    const double a2 = form_inner(ginv, pj, w2) / 2.0;
    for (std::size_t k = 0; k < pj.size(); ++k) pj.data()[k] -= a2 * w2.data()[k];
    CHECK(max_abs(pj) <= 1e-9 * scale);
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("Ricci form of Fubini-Study") {
  ComplexChartMetric fs;
  fs.chart = make_chart("cp1", {"x", "y"});
  fs.m = 1;
  fs.h = [](std::span<const Jet> z) {
    TensorJ re(1, 2), im(1, 2);
    re(0, 0) = pow(1.0 + z[0] * z[0] + z[1] * z[1], -2.0);
    return std::make_pair(re, im);
  };
  const MetricField g = to_real_metric(fs);
  const TensorD J0 = standard_complex_structure(2);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const Point x{ud(rng), ud(rng)};
    const double h = std::pow(1.0 + x[0] * x[0] + x[1] * x[1], -2.0);
    // w_FS = i h dz ^ dzbar = 2 h dx ^ dy
    TensorD wfs = elementary(2, 0, 1);
    for (auto& v : wfs.data()) v *= 2.0 * h;
    TensorD twice = wfs;
    for (auto& v : twice.data()) v *= 2.0;
    const TensorD rho = ricci_form(fs, x);
    CHECK(max_abs_diff(rho, twice) <= 1e-8);
    CHECK(max_abs_diff(ricci_form(g, x), rho) <= 1e-10);
    CHECK(oracle::relative_error(rho, ricci_form_oracle(g, J0, x)) <= 1e-6);
  }
  // constant h
  ComplexChartMetric flat;
  flat.chart = make_chart("c2", {"x1", "y1", "x2", "y2"});
  flat.m = 2;
  flat.h = [](std::span<const Jet>) {
    TensorJ re(2, 2), im(2, 2);
    re(0, 0) = 2.0;
    re(1, 1) = 3.0;
    re(0, 1) = re(1, 0) = 0.5;
    im(0, 1) = 0.25;
    im(1, 0) = -0.25;
    return std::make_pair(re, im);
  };
  CHECK(max_abs(ricci_form(flat, {0.1, 0.2, 0.3, 0.4})) == 0.0);
}

TEST_CASE("Ricci form of the scalar-flat metric is anti-self-dual") {
  for (double c : {0.0, 1.0}) {
    CAPTURE(c);
    const ComplexChartMetric h = scalflat_w_hermitian(c);
    const MetricField g = to_real_metric(h);
    const FormField rf = ricci_form(g);
    const TensorD J0 = standard_complex_structure(4);
    for (const Point& w : w_points(c, 20, 10)) {
      const TensorD rho = ricci_form(h, w);
      const TensorD G = g.value(w);
      CHECK(max_abs(rho) > 1e-6);
      CHECK(max_abs(sd_split(G, rho).first) <= 1e-6 * std::max(1.0, max_abs(rho)));
      CHECK(max_abs(ext_d(rf, w)) <= 1e-7 * std::max(1.0, max_abs(rho)));
      // Kaehler, so rho(X, Y) = Ric(JX, Y)
      const auto k = kahler_check(g, constant_complex_structure(g.chart_ptr(), J0), w);
      CHECK(k.hermitian <= 1e-9);
      CHECK(k.closure <= 1e-7);
      const TensorD ric = ricci(g, w);
      TensorD from_ric(4, 2);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int cc = 0; cc < 4; ++cc) from_ric(a, b) += J0(cc, a) * ric(cc, b);
      CHECK(max_abs_diff(rho, from_ric) <= 1e-6 * std::max(1.0, max_abs(rho)));
    }
  }
}

TEST_CASE("Kaehler potentials") {
  ComplexChartMetric line;
  const auto chart = make_chart("c1", {"x", "y"});
  const ScalarField f = scalar_field(chart, [](std::span<const Jet> z) {
    return z[0] * z[0] + z[1] * z[1];
  });
  // i dz ^ dzbar = 2 dx ^ dy
  const FormField target = constant_form(chart, [] {
    TensorD w = elementary(2, 0, 1);
    for (auto& v : w.data()) v *= 2.0;
    return w;
  }());
  const auto r = kahler_potential_check(f, target, {0.3, -1.2}, 1.0);
  CHECK(r.residual <= 1e-12);

  const TensorD J0 = standard_complex_structure(4);
  for (double c : {0.0, 1.0, 0.5, 2.0}) {
    CAPTURE(c);
    const MetricField g = scalflat_w_metric(c);
    const FormField w = kahler_form(g, constant_complex_structure(g.chart_ptr(), J0));
    const ScalarField pot = scalflat_potential_w(c);
    double scale = 0.0;
    for (const Point& x : w_points(c, 10, 11)) {
      const auto pr = kahler_potential_check(pot, w, x);
      CHECK(pr.residual <= 1e-6 * std::max(1.0, max_abs(w.value(x))));
      if (scale == 0.0) scale = pr.scale;
      CHECK(pr.scale == doctest::Approx(scale).epsilon(1e-8));
    }
    MESSAGE("potential scale at c = " << c << ": " << scale);
    CHECK(scale == doctest::Approx(c == 0.0 ? 2.0 : 4.0).epsilon(1e-8));
  }
}

TEST_CASE("Ricci forms are closed on Hermitian gallery metrics") {
  for (double c : {0.0, 0.5, 2.0}) {
    const MetricField g = to_real_metric(scalflat_w_hermitian(c));
    const FormField rf = ricci_form(g);
    for (const Point& w : w_points(c, 5, 12)) CHECK(max_abs(ext_d(rf, w)) <= 1e-7);
  }
  const GalleryEntry hk = make_entry("flat_hk_2");
  const FormField rf = ricci_form(hk.metric);
  CHECK(max_abs(ext_d(rf, hk.basepoint)) == 0.0);
}
