#include "ustar/hkqk.hpp"

#include <cmath>
#include <numbers>

namespace ustar {

HyperkahlerData hyperkahler_data(const GalleryEntry& e) {
  if (!e.kahler_forms || !e.triple) {
    throw GeometryError(ErrorKind::InvalidInput,
                        "entry '" + e.id + "' carries no hyperkaehler forms");
  }
  return {e.chart, e.metric, *e.kahler_forms, *e.triple, e.killing};
}

HyperkahlerResiduals hyperkahler_residuals(const HyperkahlerData& hk, const Point& x) {
  HyperkahlerResiduals r;
  const TensorD G = hk.g.value(x);
  const TensorD ginv = inverse(G);
  const auto ijk = hk.triple.value(x);
  std::array<TensorD, 3> recovered;
  for (int i = 0; i < 3; ++i) {
    const TensorD w = hk.forms[i].value(x);
    r.closure = std::max(r.closure, max_abs(ext_d(hk.forms[i], x)));
    recovered[i] = endomorphism_from_form(ginv, w);
    r.compatible = std::max(r.compatible, max_abs_diff(w, form_from_endomorphism(G, ijk[i])));
  }
  r.quaternion = quaternion_relation_residual(recovered);
  return r;
}

FormField haydys_form(const HyperkahlerData& hk, const ScalarField& mu) {
  auto eval = [hk, mu](const Point& x, int order) {
    const int n = hk.chart->dim;
    const Jet f = mu.eval_scalar(x, order + 2);
    const TensorJ I = hk.triple.eval(x, order + 1)[0];
    TensorJ dc(n, 1);
    for (int j = 0; j < n; ++j) {
      Jet s(0.0);
      for (int i = 0; i < n; ++i) s -= f.derivative(i) * I(i, j);
      dc(j) = s;
    }
    TensorJ F = ext_d(dc);
    const TensorJ w = hk.forms[0].eval(x, order);
    for (std::size_t k = 0; k < F.size(); ++k) F.data()[k] += w.data()[k];
    return F;
  };
  return FormField(Field(hk.chart, 2, Evaluator(eval)));
}

TensorD haydys_form(const HyperkahlerData& hk, const ScalarField& mu, const Point& x) {
  if (!hk.circle) {
    throw GeometryError(ErrorKind::InvalidInput, "hyperkaehler data has no circle action");
  }
  const int n = hk.chart->dim;
  const Jet f = mu.eval_scalar(x, 1);
  const TensorD X = hk.circle->value(x);
  const TensorD w = hk.forms[0].value(x);
  double err = 0.0;
  for (int j = 0; j < n; ++j) {
    double ix = 0.0;
    for (int i = 0; i < n; ++i) ix += X(i) * w(i, j);
    err = std::max(err, std::abs(f.grad(j) - ix));
  }
  if (err > 1e-7) {
    throw GeometryError(ErrorKind::NotMomentMap,
                        "d mu differs from i_X w1 by " + std::to_string(err));
  }
  return values(haydys_form(hk, mu).eval(x, 0));
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kBase = 4;
constexpr int kTotal = 8;
constexpr std::array<int, 4> kBaseMap = {0, 1, 2, 3};

Jet lift_jet(const Jet& j) { return j.embedded(kTotal, kBaseMap); }

Point base_part(const Point& p) { return Point(p.begin(), p.begin() + kBase); }

using Mat3J = std::array<std::array<Jet, 3>, 3>;

Mat3J rz(const Jet& a) {
  const Jet c = cos(a), s = sin(a);
  return {{{c, -s, Jet(0.0)}, {s, c, Jet(0.0)}, {Jet(0.0), Jet(0.0), Jet(1.0)}}};
}

Mat3J ry(const Jet& a) {
  const Jet c = cos(a), s = sin(a);
  return {{{c, Jet(0.0), s}, {Jet(0.0), Jet(1.0), Jet(0.0)}, {-s, Jet(0.0), c}}};
}

Mat3J mul(const Mat3J& a, const Mat3J& b) {
  Mat3J out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Jet s(0.0);
      for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
      out[i][j] = s;
    }
  return out;
}

Mat3J tr(const Mat3J& a) {
  Mat3J out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = a[j][i];
  return out;
}

Mat3J frame_jets(std::span<const Jet> s) { return mul(mul(rz(s[4]), ry(s[5])), rz(s[6])); }

std::array<Jet, 3> vee(const Mat3J& B) {
  return {0.5 * (B[2][1] - B[1][2]), 0.5 * (B[0][2] - B[2][0]), 0.5 * (B[1][0] - B[0][1])};
}

Mat3J map3(const Mat3J& a, const std::function<Jet(const Jet&)>& f) {
  Mat3J out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = f(a[i][j]);
  return out;
}

// A[m](j, i) with nabla_m w_i = sum_j A[m](j, i) w_j for the coframe triple,
// as jets of the base coordinates.
std::array<Mat3J, 4> base_connection(const MetricField& g, const ConnectionField& lc,
                                     const Point& x, int order) {
  const TensorJ G1 = g.eval(x, order + 1);
  const auto w1 = self_dual_basis(orthonormal_coframe(G1));
  const TensorJ gam = lc.eval(x, order);
  const TensorJ ginv = inverse(truncated(G1, order));
  std::array<TensorJ, 3> w;
  for (int i = 0; i < 3; ++i) w[i] = truncated(w1[i], order);
  std::array<Mat3J, 4> A;
  for (int m = 0; m < kBase; ++m) {
    std::array<TensorJ, 3> nw;
    for (int i = 0; i < 3; ++i) {
      TensorJ d = derivative(w1[i], m);
      for (int a = 0; a < kBase; ++a)
        for (int b = 0; b < kBase; ++b) {
          Jet s = d(a, b);
          for (int l = 0; l < kBase; ++l) s -= gam(l, m, a) * w[i](l, b) + gam(l, m, b) * w[i](a, l);
          d(a, b) = s;
        }
      nw[i] = d;
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) A[m][j][i] = 0.5 * form_inner(ginv, nw[i], w[j]);
  }
  return A;
}

// Fibre-direction matrix M(i, q) = vee(R^T d_q R)_i at the given order.
Mat3J fibre_matrix(const Point& p, int order) {
  const auto s1 = seed(p, order + 1);
  const Mat3J R1 = frame_jets(s1);
  const Mat3J Rt = tr(map3(R1, [order](const Jet& j) { return j.truncated(order); }));
  Mat3J M;
  for (int q = 0; q < 3; ++q) {
    const Mat3J dR = map3(R1, [q](const Jet& j) { return j.derivative(4 + q); });
    const auto v = vee(mul(Rt, dR));
    for (int i = 0; i < 3; ++i) M[i][q] = v[i];
  }
  return M;
}

TensorJ to_tensor(const Mat3J& a) {
  TensorJ t(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = a[i][j];
  return t;
}

}  // namespace

SwannChart::SwannChart(MetricField base, std::span<const Point> samples, std::optional<double> c)
    : base_(std::move(base)) {
  if (base_.dim() != kBase) {
    throw GeometryError(ErrorKind::InvalidInput, "Swann chart needs a four-dimensional base");
  }
  const ChartPtr bc = base_.chart_ptr();
  std::vector<std::string> labels = bc->coord_labels;
  labels.insert(labels.end(), {"psi1", "psi2", "psi3", "t"});
  chart_ = make_chart("swann_" + bc->name, labels, [bc](std::span<const double> p) {
    return bc->contains(p.subspan(0, kBase)) && p[5] > kEulerMargin &&
           p[5] < std::numbers::pi - kEulerMargin && p[7] > 0.0;
  });
  if (c) {
    c_ = *c;
    return;
  }
  const std::array<double, 3> euler = {0.3, 1.1, -0.4};
  const Eigen::Matrix3d R = frame(euler);
  double ab = 0.0, aa = 0.0;
  std::vector<std::pair<std::vector<double>, std::vector<double>>> rows;
  for (const Point& x : samples) {
    const Point p = lift_point(x, R, 1.0);
    const auto a = connection_forms(p, 1);
    const auto w = rotated_base_forms(p, 0);
    std::vector<double> lhs, rhs;
    for (int i = 0; i < 3; ++i) {
      const TensorD da = values(ext_d(a[i]));
      const TensorD aa2 = wedge(values(a[(i + 1) % 3]), values(a[(i + 2) % 3]));
      const TensorD wi = values(w[i]);
      for (std::size_t k = 0; k < da.size(); ++k) {
        lhs.push_back(da.data()[k] + aa2.data()[k]);
        rhs.push_back(wi.data()[k]);
      }
    }
    for (std::size_t k = 0; k < lhs.size(); ++k) {
      ab += lhs[k] * rhs[k];
      aa += rhs[k] * rhs[k];
    }
    rows.emplace_back(std::move(lhs), std::move(rhs));
  }
  if (aa == 0.0) throw GeometryError(ErrorKind::InvalidInput, "no samples for the Swann fit");
  c_ = ab / aa;
  for (const auto& [lhs, rhs] : rows)
    for (std::size_t k = 0; k < lhs.size(); ++k)
      fit_residual_ = std::max(fit_residual_, std::abs(lhs[k] - c_ * rhs[k]));
}

std::array<TensorJ, 3> SwannChart::connection_forms(const Point& p, int order) const {
  chart_->require(p);
  const auto A = base_connection(base_, levi_civita(base_), base_part(p), order);
  const auto s = seed(p, order);
  const Mat3J R = frame_jets(s);
  const Mat3J Rt = tr(R);
  const Mat3J M = fibre_matrix(p, order);
  std::array<TensorJ, 3> a = {TensorJ(kTotal, 1), TensorJ(kTotal, 1), TensorJ(kTotal, 1)};
  for (int m = 0; m < kBase; ++m) {
    const Mat3J Am = map3(A[m], lift_jet);
    const auto v = vee(mul(mul(Rt, Am), R));
    for (int i = 0; i < 3; ++i) a[i](m) = v[i];
  }
  for (int q = 0; q < 3; ++q)
    for (int i = 0; i < 3; ++i) a[i](4 + q) = M[i][q];
  return a;
}

std::array<TensorJ, 3> SwannChart::rotated_base_forms(const Point& p, int order) const {
  chart_->require(p);
  const TensorJ G = base_.eval(base_part(p), order);
  const auto w = self_dual_basis(orthonormal_coframe(G));
  const Mat3J R = frame_jets(seed(p, order));
  std::array<TensorJ, 3> out = {TensorJ(kTotal, 2), TensorJ(kTotal, 2), TensorJ(kTotal, 2)};
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < kBase; ++a)
      for (int b = 0; b < kBase; ++b) {
        Jet s(0.0);
        for (int j = 0; j < 3; ++j) s += R[j][i] * lift_jet(w[j](a, b));
        out[i](a, b) = s;
      }
  return out;
}

std::array<Point, 3> SwannChart::fundamental_fields(const Point& p) const {
  chart_->require(p);
  const TensorD Minv = inverse(values(to_tensor(fibre_matrix(p, 0))));
  std::array<Point, 3> E;
  for (int i = 0; i < 3; ++i) {
    E[i] = Point(kTotal, 0.0);
    for (int q = 0; q < 3; ++q) E[i][4 + q] = Minv(q, i);
  }
  return E;
}

Point SwannChart::horizontal_lift(const Point& p, std::span<const double> v) const {
  const auto a = connection_forms(p, 0);
  const TensorD Minv = inverse(values(to_tensor(fibre_matrix(p, 0))));
  Point out(kTotal, 0.0);
  std::array<double, 3> av{};
  for (int m = 0; m < kBase; ++m) {
    out[m] = v[m];
    for (int i = 0; i < 3; ++i) av[i] += a[i](m).value() * v[m];
  }
  for (int q = 0; q < 3; ++q)
    for (int i = 0; i < 3; ++i) out[4 + q] -= Minv(q, i) * av[i];
  return out;
}

VectorField SwannChart::lift_field(
    const VectorField& X, std::function<std::array<Jet, 3>(const Point&, int)> fibre) const {
  auto self = *this;
  auto eval = [self, X, fibre](const Point& p, int order) {
    const auto a = self.connection_forms(p, order);
    const TensorJ Xb = X.eval(base_part(p), order);
    const TensorJ Minv = inverse(to_tensor(fibre_matrix(p, order)));
    const auto f = fibre(p, order);
    TensorJ out(kTotal, 1);
    std::array<Jet, 3> rhs;
    for (int i = 0; i < 3; ++i) rhs[i] = f[i];
    for (int m = 0; m < kBase; ++m) {
      out(m) = lift_jet(Xb(m));
      for (int i = 0; i < 3; ++i) rhs[i] -= a[i](m) * out(m);
    }
    for (int q = 0; q < 3; ++q) {
      Jet s(0.0);
      for (int i = 0; i < 3; ++i) s += Minv(q, i) * rhs[i];
      out(4 + q) = s;
    }
    return out;
  };
  return VectorField(Field(chart_, 1, Evaluator(eval)));
}

std::array<FormField, 3> SwannChart::swann_forms() const {
  std::array<FormField, 3> out;
  for (int i = 0; i < 3; ++i) {
    auto self = *this;
    auto eval = [self, i](const Point& p, int order) {
      TensorJ ta = self.connection_forms(p, order + 1)[i];
      const Jet t = seed(p, order + 1)[7];
      for (auto& c : ta.data()) c = t * c;
      return ext_d(ta);
    };
    out[i] = FormField(Field(chart_, 2, Evaluator(eval)));
  }
  return out;
}

std::array<TensorD, 3> SwannChart::swann_forms(const Point& p) const {
  const auto a = connection_forms(p, 1);
  const Jet t = seed(p, 1)[7];
  std::array<TensorD, 3> out;
  for (int i = 0; i < 3; ++i) {
    TensorJ ta = a[i];
    for (auto& c : ta.data()) c = t * c;
    out[i] = values(ext_d(ta));
  }
  return out;
}

std::array<TensorD, 3> SwannChart::swann_expansion(const Point& p) const {
  const auto a = connection_forms(p, 0);
  const auto w = rotated_base_forms(p, 0);
  const double t = p[7];
  TensorD dt(kTotal, 1);
  dt(7) = 1.0;
  std::array<TensorD, 3> out;
  for (int i = 0; i < 3; ++i) {
    const TensorD first = wedge(dt, values(a[i]));
    const TensorD second = wedge(values(a[(i + 1) % 3]), values(a[(i + 2) % 3]));
    const TensorD wi = values(w[i]);
    out[i] = first;
    for (std::size_t k = 0; k < first.size(); ++k)
      out[i].data()[k] += -t * second.data()[k] + t * c_ * wi.data()[k];
  }
  return out;
}

double SwannChart::curvature_residual(const Point& p) const {
  const auto a = connection_forms(p, 1);
  const auto w = rotated_base_forms(p, 0);
  double r = 0.0;
  for (int i = 0; i < 3; ++i) {
    const TensorD da = values(ext_d(a[i]));
    const TensorD aa = wedge(values(a[(i + 1) % 3]), values(a[(i + 2) % 3]));
    const TensorD wi = values(w[i]);
    for (std::size_t k = 0; k < da.size(); ++k)
      r = std::max(r, std::abs(da.data()[k] + aa.data()[k] - c_ * wi.data()[k]));
  }
  return r;
}

Point SwannChart::lift_point(const Point& base_point, const Eigen::Matrix3d& R, double t) const {
  const auto e = euler_zyz(R);
  Point p = base_point;
  p.insert(p.end(), {e[0], e[1], e[2], t});
  chart_->require(p);
  return p;
}

Eigen::Matrix3d SwannChart::frame(std::span<const double> euler) {
  using Eigen::AngleAxisd;
  using Eigen::Vector3d;
  return (AngleAxisd(euler[0], Vector3d::UnitZ()) * AngleAxisd(euler[1], Vector3d::UnitY()) *
          AngleAxisd(euler[2], Vector3d::UnitZ()))
      .toRotationMatrix();
}

std::array<double, 3> euler_zyz(const Eigen::Matrix3d& R) {
  const double b = std::acos(std::clamp(R(2, 2), -1.0, 1.0));
  if (!(b > kEulerMargin && b < std::numbers::pi - kEulerMargin)) {
    throw GeometryError(ErrorKind::DomainViolation, "frame too close to the Euler-angle pole");
  }
  return {std::atan2(R(1, 2), R(0, 2)), b, std::atan2(R(2, 1), -R(2, 0))};
}

// ---------------------------------------------------------------------------

std::array<Jet, 3> LiftedField::rotated_moment(const Point& p, int order) const {
  const auto mu = moment.components(base_part(p), order);
  const Mat3J R = frame_jets(seed(p, order));
  std::array<Jet, 3> out;
  for (int i = 0; i < 3; ++i) {
    Jet s(0.0);
    for (int j = 0; j < 3; ++j) s += R[j][i] * lift_jet(mu[j]);
    out[i] = s;
  }
  return out;
}

double LiftedField::residual(const Point& p, bool horizontal_only) const {
  const TensorD V = (horizontal_only ? X_bar : Y).value(p);
  const auto phi = chart.swann_forms(p);
  const auto mu = rotated_moment(p, 1);
  const Jet t = seed(p, 1)[7];
  double r = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Jet h = chart.c() * mu[i] * t;
    for (int j = 0; j < kTotal; ++j) {
      double iv = 0.0;
      for (int k = 0; k < kTotal; ++k) iv += V(k) * phi[i](k, j);
      r = std::max(r, std::abs(iv - h.grad(j)));
    }
  }
  return r;
}

std::array<double, 3> LiftedField::moment_map(const Point& p) const {
  const auto mu = rotated_moment(p, 0);
  return {chart.c() * mu[0].value() * p[7], chart.c() * mu[1].value() * p[7],
          chart.c() * mu[2].value() * p[7]};
}

LiftedField lifted_field(const SwannChart& sc, const MomentSection4d& ms) {
  const double c = sc.c();
  const VectorField X = ms.killing_field();
  LiftedField lf{sc, ms, VectorField(), VectorField()};
  auto zero = [](const Point&, int) { return std::array<Jet, 3>{Jet(0.0), Jet(0.0), Jet(0.0)}; };
  lf.X_bar = sc.lift_field(X, zero);
  const LiftedField probe = lf;
  lf.Y = sc.lift_field(X, [probe, c](const Point& p, int order) {
    auto mu = probe.rotated_moment(p, order);
    for (auto& m : mu) m = -c * m;
    return mu;
  });
  return lf;
}

Point level_set_point(const LiftedField& lf, const Point& base_point) {
  const auto mu = lf.moment.components(base_point, 0);
  Eigen::Vector3d n(mu[0].value(), mu[1].value(), mu[2].value());
  const double len = n.norm();
  if (!(len > kZeroMomentTol)) {
    throw GeometryError(ErrorKind::ZeroMoment, "moment section vanishes at this point");
  }
  n /= len;
  Eigen::Vector3d u = Eigen::Vector3d::UnitZ().cross(n);
  if (u.norm() < 1e-3) u = Eigen::Vector3d::UnitX().cross(n);
  u.normalize();
  Eigen::Matrix3d R;
  R.col(0) = n;
  R.col(1) = u.cross(n);
  R.col(2) = u;
  return lf.chart.lift_point(base_point, R, 1.0 / len);
}

// ---------------------------------------------------------------------------

namespace {

struct Cx {
  Jet re, im;
};
Cx operator*(const Cx& a, const Cx& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

}  // namespace

std::vector<Jet> FlatQuotient::embed(std::span<const Jet> s) const {
  const int N = m + 1;
  std::vector<Cx> z, w;  // the non-gauge coordinates in order
  for (int a = 0; a < m; ++a) z.push_back({s[2 * a], s[2 * a + 1]});
  for (int a = 0; a < m; ++a) w.push_back({s[2 * m + 2 * a], s[2 * m + 2 * a + 1]});
  Cx S{Jet(0.0), Jet(0.0)};
  Jet zz(0.0), ww(0.0);
  for (int a = 0; a < m; ++a) {
    const Cx p = z[a] * w[a];
    S.re += p.re;
    S.im += p.im;
    zz += z[a].re * z[a].re + z[a].im * z[a].im;
    ww += w[a].re * w[a].re + w[a].im * w[a].im;
  }
  const Jet B = S.re * S.re + S.im * S.im;
  const Jet A = 2.0 * level + ww - zz;
  const Jet r2 = 0.5 * (A + sqrt(A * A + 4.0 * B));
  const Jet r = sqrt(r2);
  const Cx wg{-S.re / r, -S.im / r};

  std::vector<Jet> out(4 * N, Jet(0.0));
  int k = 0;
  for (int a = 0; a < N; ++a) {
    const Cx zc = a == gauge ? Cx{r, Jet(0.0)} : z[k];
    const Cx wc = a == gauge ? wg : w[k];
    if (a != gauge) ++k;
    out[2 * a] = zc.re;
    out[2 * a + 1] = zc.im;
    out[2 * N + 2 * a] = wc.re;
    out[2 * N + 2 * a + 1] = wc.im;
  }
  return out;
}

Point FlatQuotient::embed(const Point& s) const {
  std::vector<Jet> sj(s.begin(), s.end());
  const auto e = embed(std::span<const Jet>(sj));
  Point out;
  for (const Jet& j : e) out.push_back(j.value());
  return out;
}

Point FlatQuotient::orbit(const Point& p) {
  const int N = static_cast<int>(p.size()) / 4;
  Point v(p.size());
  for (int a = 0; a < N; ++a) {
    v[2 * a] = -p[2 * a + 1];
    v[2 * a + 1] = p[2 * a];
    v[2 * N + 2 * a] = p[2 * N + 2 * a + 1];
    v[2 * N + 2 * a + 1] = -p[2 * N + 2 * a];
  }
  return v;
}

std::array<double, 3> FlatQuotient::moment(const Point& p) const {
  const int N = static_cast<int>(p.size()) / 4;
  double zz = 0.0, ww = 0.0, sr = 0.0, si = 0.0;
  for (int a = 0; a < N; ++a) {
    const double zr = p[2 * a], zi = p[2 * a + 1];
    const double wr = p[2 * N + 2 * a], wi = p[2 * N + 2 * a + 1];
    zz += zr * zr + zi * zi;
    ww += wr * wr + wi * wi;
    sr += zr * wr - zi * wi;
    si += zr * wi + zi * wr;
  }
  return {0.5 * (zz - ww) - level, sr, si};
}

namespace {

// Derivatives d_a p (as jets of `order`) and the orbit direction at p.
struct SliceFrame {
  std::vector<std::vector<Jet>> dp;  // dp[a][k]
  std::vector<Jet> V;
};

SliceFrame slice_frame(const FlatQuotient& q, const Point& s, int order) {
  const auto sj = seed(s, order + 1);
  const auto p = q.embed(std::span<const Jet>(sj));
  const int n = static_cast<int>(s.size());
  const int N = q.m + 1;
  SliceFrame f;
  for (int a = 0; a < n; ++a) {
    std::vector<Jet> d;
    for (const Jet& c : p) d.push_back(c.derivative(a));
    f.dp.push_back(std::move(d));
  }
  f.V.resize(p.size());
  for (int a = 0; a < N; ++a) {
    f.V[2 * a] = -p[2 * a + 1].truncated(order);
    f.V[2 * a + 1] = p[2 * a].truncated(order);
    f.V[2 * N + 2 * a] = p[2 * N + 2 * a + 1].truncated(order);
    f.V[2 * N + 2 * a + 1] = -p[2 * N + 2 * a].truncated(order);
  }
  return f;
}

Jet dot(const std::vector<Jet>& a, const std::vector<Jet>& b) {
  Jet s(0.0);
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

std::vector<Point> FlatQuotient::horizontal_basis(const Point& s) const {
  chart->require(s);
  const SliceFrame f = slice_frame(*this, s, 0);
  const double vv = dot(f.V, f.V).value();
  std::vector<Point> out;
  for (const auto& d : f.dp) {
    const double dv = dot(d, f.V).value();
    Point h;
    for (std::size_t k = 0; k < d.size(); ++k) h.push_back(d[k].value() - dv / vv * f.V[k].value());
    out.push_back(std::move(h));
  }
  return out;
}

FlatQuotient flat_quotient(int m, int gauge, double level) {
  if (m < 1 || gauge < 0 || gauge > m || !(level > 0.0)) {
    throw GeometryError(ErrorKind::InvalidInput, "flat quotient needs m >= 1, 0 <= gauge <= m, level > 0");
  }
  FlatQuotient q;
  q.m = m;
  q.gauge = gauge;
  q.level = level;
  std::vector<std::string> labels;
  for (const char* kind : {"z", "w"})
    for (int a = 0; a <= m; ++a) {
      if (a == gauge) continue;
      labels.push_back(std::string("re_") + kind + std::to_string(a + 1));
      labels.push_back(std::string("im_") + kind + std::to_string(a + 1));
    }
  const FlatQuotient shape = q;
  q.chart = make_chart("calabi_" + std::to_string(m) + "_g" + std::to_string(gauge), labels,
                       [shape](std::span<const double> s) {
                         const Point p = shape.embed(Point(s.begin(), s.end()));
                         const double r = p[2 * shape.gauge];
                         for (int a = 0; a <= shape.m; ++a) {
                           if (a == shape.gauge) continue;
                           if (!(r > std::hypot(p[2 * a], p[2 * a + 1]) + 1e-8)) return false;
                         }
                         return std::isfinite(r);
                       });
  return q;
}

MetricField flat_quotient_metric(const FlatQuotient& q) {
  auto eval = [q](const Point& s, int order) {
    const int n = 4 * q.m;
    const SliceFrame f = slice_frame(q, s, order);
    const Jet vv = dot(f.V, f.V);
    std::vector<Jet> dv;
    for (const auto& d : f.dp) dv.push_back(dot(d, f.V));
    TensorJ g(n, 2);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        g(a, b) = dot(f.dp[a], f.dp[b]) - dv[a] * dv[b] / vv;
        g(b, a) = g(a, b);
      }
    return g;
  };
  return MetricField(Field(q.chart, 2, Evaluator(eval)), Signature{4 * q.m, 0});
}

std::array<FormField, 3> flat_quotient_forms(const FlatQuotient& q) {
  const GalleryEntry flat = flat_hk_entry(q.m + 1);
  const auto forms = *flat.kahler_forms;
  std::array<FormField, 3> out;
  for (int i = 0; i < 3; ++i) {
    const TensorD w = forms[i].value(Point(4 * (q.m + 1), 0.0));
    auto eval = [q, w](const Point& s, int order) {
      const int n = 4 * q.m;
      const SliceFrame f = slice_frame(q, s, order);
      const int big = w.dim();
      TensorJ out(n, 2);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          Jet sum(0.0);
          for (int k = 0; k < big; ++k)
            for (int l = 0; l < big; ++l)
              if (w(k, l) != 0.0) sum += w(k, l) * f.dp[a][k] * f.dp[b][l];
          out(a, b) = sum;
        }
      return out;
    };
    out[i] = FormField(Field(q.chart, 2, Evaluator(eval)));
  }
  return out;
}

std::pair<FlatQuotient, Point> gauge_fix(int m, const Point& p, double level) {
  const int N = m + 1;
  if (static_cast<int>(p.size()) != 4 * N) {
    throw GeometryError(ErrorKind::InvalidInput, "point has the wrong dimension");
  }
  FlatQuotient probe;
  probe.m = m;
  probe.level = level;
  const auto nu = probe.moment(p);
  const double off = std::max({std::abs(nu[0]), std::abs(nu[1]), std::abs(nu[2])});
  if (off > 1e-10) {
    throw GeometryError(ErrorKind::OffLevelSet, "point is off the level set by " + std::to_string(off));
  }
  std::vector<double> mod(N);
  for (int a = 0; a < N; ++a) mod[a] = std::hypot(p[2 * a], p[2 * a + 1]);
  const int g = static_cast<int>(std::max_element(mod.begin(), mod.end()) - mod.begin());
  for (int a = 0; a < N; ++a) {
    if (a != g && mod[g] - mod[a] <= 1e-8) {
      throw GeometryError(ErrorKind::GaugeDegenerate, "largest |z_a| is not unique");
    }
  }
  const double th = std::atan2(p[2 * g + 1], p[2 * g]);
  const double c = std::cos(th), s = std::sin(th);
  Point slice;
  for (int a = 0; a < N; ++a) {
    if (a == g) continue;
    const double x = p[2 * a], y = p[2 * a + 1];
    slice.push_back(c * x + s * y);  // e^{-i th} z
    slice.push_back(c * y - s * x);
  }
  for (int a = 0; a < N; ++a) {
    if (a == g) continue;
    const double x = p[2 * N + 2 * a], y = p[2 * N + 2 * a + 1];
    slice.push_back(c * x - s * y);  // e^{i th} w
    slice.push_back(c * y + s * x);
  }
  FlatQuotient q = flat_quotient(m, g, level);
  q.chart->require(slice);
  return {q, slice};
}

}  // namespace ustar
