#include <chrono>
#include <cmath>

#include "doctest.h"
#include "ustar/gallery.hpp"
#include "ustar/groups.hpp"
#include "ustar/probe.hpp"
#include "ustar/qk2ustar.hpp"

using namespace ustar;

namespace {

std::vector<Point> samples_of(const GalleryEntry& e, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back(e.sample(rng));
  return pts;
}

Eigen::MatrixXd to_matrix(const TensorD& t) {
  const int n = t.dim();
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = t(i, j);
  return M;
}

double orthogonality_defect(const Eigen::MatrixXd& H, const Eigen::MatrixXd& G) {
  return (H.transpose() * G * H - G).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("loops: closure, reversal and concatenation") {
  const Point base = {0.1, 0.2, 0.3, 0.4};
  const LoopSpec r = LoopSpec::rectangle(base, 0, 2, 0.1, -0.2);
  CHECK_NOTHROW(r.require_closed());
  CHECK_NOTHROW(r.reversed().require_closed());
  CHECK_NOTHROW(r.then(r.reversed()).require_closed());
  LoopSpec open = r;
  open.segments.pop_back();
  CHECK_THROWS_AS(open.require_closed(), GeometryError);
  CHECK_THROWS_AS(r.then(LoopSpec::rectangle({0.0, 0.0, 0.0, 0.0}, 0, 1, 0.1, 0.1)),
                  GeometryError);
}

TEST_CASE("flat connections have trivial holonomy") {
  const GalleryEntry e = flat4_entry();
  const ConnectionField lc = levi_civita(e.metric);
  const LoopSpec loop = LoopSpec::polygon({{0, 0, 0, 0}, {1, 0.5, 0, 0}, {0.3, 2, 1, -1}, {0, 0, 1, 0}});
  const HolonomyElement h = parallel_transport(lc, loop);
  CHECK((h.matrix - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-9);

  // modified connection with alpha = 0
  auto zero = [](const Point&, int) { return TensorJ(4, 1); };
  const ConnectionField flat = modified_connection(lc, zero, *e.triple);
  const AlmostComplexField I = e.triple->component(0);
  const Report rep = holonomy_survey(flat, e.metric, I, *e.triple, e.basepoint, 50, 3);
  CHECK(rep.all_pass());
  CHECK(std::get<double>(*rep.meta_value("max_defect")) <= 1e-9);
  CHECK(std::get<double>(*rep.meta_value("pass_fraction")) == 1.0);
}

TEST_CASE("small loops on the sphere factor rotate by curvature times area") {
  const MetricField g = sphere_factor_metric();
  const ConnectionField lc = levi_civita(g);
  const double v0 = 0.3, p0 = 0.2, s = 0.1;
  const LoopSpec loop = LoopSpec::rectangle({v0, p0}, 0, 1, s, s);
  const HolonomyElement h = parallel_transport(lc, loop);
  // orthonormal frame at the basepoint: g = diag(1/(v^2+4)^2, 1/(v^2+4))
  const double q = v0 * v0 + 4.0;
  Eigen::Matrix2d E = Eigen::Matrix2d::Zero();
  E(0, 0) = 1.0 / q;
  E(1, 1) = 1.0 / std::sqrt(q);
  const Eigen::Matrix2d R = E * h.matrix * E.inverse();
  const double angle = std::atan2(R(1, 0), R(0, 0));
  // area = s * integral of (v^2 + 4)^(-3/2) dv, antiderivative v / (4 sqrt(v^2 + 4))
  auto F = [](double v) { return v / (4.0 * std::sqrt(v * v + 4.0)); };
  const double area = s * (F(v0 + s) - F(v0));
  CHECK(std::abs(std::abs(angle) - 4.0 * area) <= 0.02 * 4.0 * area);
  CHECK(orthogonality_defect(h.matrix, to_matrix(g.value({v0, p0}))) <= 1e-9);
}

TEST_CASE("RK4 convergence order of the orthogonality and determinant defects") {
  const MetricField g = sphere_factor_metric();
  const ConnectionField lc = levi_civita(g);
  const Point base = {0.2, 0.1};
  const LoopSpec loop = LoopSpec::rectangle(base, 0, 1, 1.5, 1.5);
  const Eigen::MatrixXd G = to_matrix(g.value(base));
  std::vector<double> orth, det;
  for (int steps : {2, 4, 8}) {
    const Eigen::MatrixXd H = transport_fixed(lc, loop, steps);
    orth.push_back(orthogonality_defect(H, G));
    det.push_back(std::abs(H.determinant() - 1.0));
  }
  for (int k = 0; k + 1 < 3; ++k) {
    CHECK(std::log2(orth[k] / orth[k + 1]) >= 3.5);
    CHECK(std::log2(det[k] / det[k + 1]) >= 3.5);
  }
}

TEST_CASE("Kaehler holonomy commutes with the complex structure") {
  const GalleryEntry e = make_entry("scalflat");
  const ConnectionField lc = levi_civita(e.metric);
  const LoopSpec loop = LoopSpec::rectangle(e.basepoint, 0, 2, 0.05, 0.05);
  const HolonomyElement h = parallel_transport(lc, loop);
  const Eigen::MatrixXd I = to_matrix(e.complex_structure->value(e.basepoint));
  CHECK((h.matrix * I - I * h.matrix).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("reversal and multiplicativity of transport") {
  const GalleryEntry e = make_entry("s4");
  const ConnectionField lc = levi_civita(e.metric);
  const LoopSpec l1 = LoopSpec::rectangle(e.basepoint, 0, 1, 0.4, 0.3, 4);
  const LoopSpec l2 = LoopSpec::rectangle(e.basepoint, 2, 3, -0.3, 0.5, 4);
  const HolonomyElement h1 = parallel_transport(lc, l1);
  const HolonomyElement h2 = parallel_transport(lc, l2);
  const HolonomyElement back = parallel_transport(lc, l1.reversed());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
  CHECK((back.matrix * h1.matrix - id).cwiseAbs().maxCoeff() <= 10.0 * (h1.error + back.error));
  const HolonomyElement h12 = parallel_transport(lc, l1.then(l2));
  CHECK((h12.matrix - h2.matrix * h1.matrix).cwiseAbs().maxCoeff() <=
        10.0 * (h1.error + h2.error + h12.error));
  // the loops are far from trivial
  CHECK((h1.matrix - id).cwiseAbs().maxCoeff() > 1e-2);
}

TEST_CASE("transport errors") {
  const GalleryEntry e = make_entry("s4");
  const ConnectionField lc = levi_civita(e.metric);
  const LoopSpec loop = LoopSpec::rectangle(e.basepoint, 0, 1, 0.4, 0.3, 2);
  try {
    parallel_transport(lc, loop, 1e-30, 1);
    FAIL("expected ToleranceNotMet");
  } catch (const GeometryError& err) {
    CHECK(err.kind() == ErrorKind::ToleranceNotMet);
  }
  const GalleryEntry b = make_entry("bergman");
  const LoopSpec out = LoopSpec::rectangle(b.basepoint, 0, 1, -2.0, 0.3, 2);
  try {
    parallel_transport(levi_civita(b.metric), out);
    FAIL("expected DomainViolation");
  } catch (const GeometryError& err) {
    CHECK(err.kind() == ErrorKind::DomainViolation);
  }
}

TEST_CASE("adapted frame puts I and J in standard form") {
  const GalleryEntry e = make_entry("bergman");
  const auto ijk = e.triple->value(e.basepoint);
  const TensorD G = e.metric.value(e.basepoint);
  const Eigen::MatrixXd F = adapted_frame(G, ijk[0], ijk[1]);
  CHECK((F.transpose() * to_matrix(G) * F - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <=
        1e-12);
  const Eigen::MatrixXd Ia = F.inverse() * to_matrix(ijk[0]) * F;
  const Eigen::MatrixXd Ja = F.inverse() * to_matrix(ijk[1]) * F;
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(Ia(2 * k + 1, 2 * k) - 1.0) <= 1e-12);
    CHECK(std::abs(Ia(2 * k, 2 * k + 1) + 1.0) <= 1e-12);
  }
  // J e_1 = e_2 and J e_2 = -e_1
  CHECK(std::abs(Ja(2, 0) - 1.0) <= 1e-12);
  CHECK(std::abs(Ja(0, 2) + 1.0) <= 1e-12);

  // the real form of a unitary matrix is a member, complex conjugation is not
  const double c = std::cos(0.4), sn = std::sin(0.4);
  Eigen::Matrix2cd U;
  U << Complex(c, 0.0), Complex(0.0, sn), Complex(0.0, sn), Complex(c, 0.0);
  U *= std::polar(1.0, 0.25);
  Eigen::MatrixXd Ha(4, 4);
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      Ha(2 * k, 2 * l) = U(k, l).real();
      Ha(2 * k + 1, 2 * l) = U(k, l).imag();
      Ha(2 * k, 2 * l + 1) = -U(k, l).imag();
      Ha(2 * k + 1, 2 * l + 1) = U(k, l).real();
    }
  const Eigen::MatrixXd H = F * Ha * F.inverse();
  CHECK((complex_matrix(H, F) - U).cwiseAbs().maxCoeff() <= 1e-12);
  const MembershipDefect good = membership_defect(H, G, ijk[0], ijk[1]);
  CHECK(good.defect() <= 1e-10);
  CHECK(std::abs(good.theta - 0.25) <= 1e-10);
  Eigen::MatrixXd conj = Eigen::MatrixXd::Identity(4, 4);
  conj(1, 1) = -1.0;
  const MembershipDefect bad = membership_defect(F * conj * F.inverse(), G, ijk[0], ijk[1]);
  CHECK(bad.commutator > 0.5);
}

TEST_CASE("holonomy surveys of the U*(2) connections") {
  for (const std::string id : {"s4", "bergman"}) {
    CAPTURE(id);
    const GalleryEntry e = make_entry(id);
    const auto samples = samples_of(e, 6, 9);
    const UStarConstruction c = qk_to_ustar(e.metric, *e.killing, samples);
    const auto start = std::chrono::steady_clock::now();
    const Report rep = holonomy_survey(c.connection, e.metric, c.I, *e.triple, e.basepoint, 40, 11);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    MESSAGE(id << " survey of 40 loops: " << secs << " s, max defect "
               << std::get<double>(*rep.meta_value("max_defect")));
    CHECK(rep.all_pass());
    CHECK(std::get<double>(*rep.meta_value("pass_fraction")) == 1.0);
    // same seed, same report
    const Report again = holonomy_survey(c.connection, e.metric, c.I, *e.triple, e.basepoint, 5, 11);
    const Report first5 = holonomy_survey(c.connection, e.metric, c.I, *e.triple, e.basepoint, 5, 11);
    CHECK(again.to_json() == first5.to_json());

    // plain Levi-Civita does not preserve I
    const Report lc = holonomy_survey(levi_civita(e.metric), e.metric, c.I, *e.triple, e.basepoint, 10, 11);
    CHECK(std::get<double>(*lc.meta_value("max_defect")) > 1e-3);
  }
}
