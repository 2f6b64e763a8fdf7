#include "ustar/qk2ustar.hpp"

#include <cmath>

namespace ustar {

MomentSection4d::MomentSection4d(MetricField g, VectorField X, double calibration)
    : g_(std::move(g)), X_(std::move(X)), k_(calibration) {
  if (g_.dim() != 4) {
    throw GeometryError(ErrorKind::InvalidInput, "moment sections via the Hodge star need dim 4");
  }
}

TensorJ MomentSection4d::self_dual_dx(const Point& x, int order) const {
  const TensorJ G = g_.eval(x, order + 1);
  const TensorJ V = X_.eval(x, order + 1);
  TensorJ xflat(4, 1);
  for (int i = 0; i < 4; ++i) {
    Jet s(0.0);
    for (int j = 0; j < 4; ++j) s += G(i, j) * V(j);
    xflat(i) = s;
  }
  const TensorJ dx = ext_d(xflat);
  return sd_split(truncated(G, order), dx).first;
}

TensorJ MomentSection4d::section(const Point& x, int order) const {
  TensorJ s = self_dual_dx(x, order);
  for (auto& c : s.data()) c = k_ * c;
  return s;
}

Jet MomentSection4d::mu1(const Point& x, int order) const {
  const TensorJ mu = section(x, order);
  const TensorJ ginv = inverse(g_.eval(x, order));
  const Jet n2 = 0.5 * form_inner(ginv, mu, mu);
  if (!(std::sqrt(std::max(n2.value(), 0.0)) > kZeroMomentTol)) {
    throw GeometryError(ErrorKind::ZeroMoment, "moment section vanishes at this point");
  }
  return sqrt(n2);
}

TensorJ MomentSection4d::direction(const Point& x, int order) const {
  TensorJ mu = section(x, order);
  const Jet inv = 1.0 / mu1(x, order);
  for (auto& c : mu.data()) c = c * inv;
  return mu;
}

std::array<Jet, 3> MomentSection4d::components(const Point& x, int order) const {
  const TensorJ G = g_.eval(x, order);
  const TensorJ ginv = inverse(G);
  const auto w = self_dual_basis(orthonormal_coframe(G));
  const TensorJ mu = section(x, order);
  return {0.5 * form_inner(ginv, mu, w[0]), 0.5 * form_inner(ginv, mu, w[1]),
          0.5 * form_inner(ginv, mu, w[2])};
}

AlmostComplexField MomentSection4d::complex_structure() const {
  auto self = *this;
  auto eval = [self](const Point& x, int order) {
    return endomorphism_from_form(inverse(self.g_.eval(x, order)), self.direction(x, order));
  };
  return AlmostComplexField(Field(g_.chart_ptr(), 2, Evaluator(eval)));
}

ScalarField MomentSection4d::mu1_field() const {
  auto self = *this;
  auto eval = [self](const Point& x, int order) {
    TensorJ t(4, 0);
    t(0) = self.mu1(x, order);
    return t;
  };
  return ScalarField(Field(g_.chart_ptr(), 0, Evaluator(eval)));
}

FormField MomentSection4d::section_field() const {
  auto self = *this;
  auto eval = [self](const Point& x, int order) { return self.section(x, order); };
  return FormField(Field(g_.chart_ptr(), 2, Evaluator(eval)));
}

// ---------------------------------------------------------------------------

namespace {

TensorD interior_value(const TensorD& X, const TensorD& w) {
  const int n = w.dim();
  TensorD out(n, 1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out(j) += X(i) * w(i, j);
  return out;
}

}  // namespace

Calibration calibrate_moment(const MetricField& g, const VectorField& X,
                             std::span<const Point> samples) {
  const MomentSection4d raw(g, X, 1.0);
  double ab = 0.0, aa = 0.0, scale = 1.0;
  std::vector<std::pair<TensorD, TensorD>> pairs;
  for (const Point& x : samples) {
    const Jet m = raw.mu1(x, 1);
    TensorD a(4, 1);
    for (int i = 0; i < 4; ++i) a(i) = m.grad(i);
    const TensorD b = interior_value(X.value(x), values(raw.direction(x, 0)));
    for (int i = 0; i < 4; ++i) {
      ab += a(i) * b(i);
      aa += a(i) * a(i);
      scale = std::max(scale, std::abs(b(i)));
    }
    pairs.emplace_back(a, b);
  }
  Calibration c;
  if (aa == 0.0) {
    c.k = 0.0;
    c.residual = std::numeric_limits<double>::infinity();
    return c;
  }
  c.k = ab / aa;
  for (const auto& [a, b] : pairs)
    for (int i = 0; i < 4; ++i) c.residual = std::max(c.residual, std::abs(c.k * a(i) - b(i)) / scale);
  return c;
}

MomentSection4d moment_section_4d(const MetricField& g, const VectorField& X,
                                  std::span<const Point> samples) {
  for (const Point& x : samples) {
    if (killing_residual(g, X, x) > 1e-6) {
      throw GeometryError(ErrorKind::NotKilling, "vector field is not Killing");
    }
  }
  const Calibration c = calibrate_moment(g, X, samples);
  if (!(c.residual <= 1e-5)) {
    throw GeometryError(ErrorKind::ToleranceNotMet,
                        "moment calibration residual " + std::to_string(c.residual));
  }
  return MomentSection4d(g, X, c.k);
}

namespace {

// nabla_k w_ab for a 2-form given to order >= 1 and connection values.
std::vector<TensorJ> covariant_derivative_2form(const TensorJ& w, const TensorD& gam) {
  const int n = w.dim();
  std::vector<TensorJ> out;
  for (int k = 0; k < n; ++k) {
    TensorJ d = truncated(derivative(w, k), 0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Jet s = d(a, b);
        for (int m = 0; m < n; ++m) {
          s -= gam(m, k, a) * w(m, b).truncated(0) + gam(m, k, b) * w(a, m).truncated(0);
        }
        d(a, b) = s;
      }
    out.push_back(d);
  }
  return out;
}

std::array<Jet, 3> cross(const std::array<Jet, 3>& a, const std::array<Jet, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace

MomentEquationResiduals moment_equation_residuals(const MomentSection4d& ms, const Point& x) {
  const MetricField& g = ms.metric();
  const TensorJ G = g.eval(x, 1);
  const TensorD G0 = values(G);
  const TensorD ginv = inverse(G0);
  const TensorD gam = christoffel(g, x);
  const TensorD X = ms.killing_field().value(x);
  const auto basis = self_dual_basis(orthonormal_coframe(G));

  const Jet mu1 = ms.mu1(x, 1);
  const TensorJ mu = ms.section(x, 1);
  const TensorJ w1 = ms.direction(x, 1);

  // rotated frame: w1 = w-hat, w2, w3 completing an oriented orthonormal triple
  std::array<Jet, 3> n;
  const TensorJ ginv_j = inverse(G);
  for (int i = 0; i < 3; ++i) n[i] = 0.5 * form_inner(ginv_j, w1, basis[i]);
  int axis = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(n[i].value()) < std::abs(n[axis].value())) axis = i;
  }
  std::array<Jet, 3> e2 = {Jet(0.0), Jet(0.0), Jet(0.0)};
  e2[axis] = Jet(1.0);
  for (int i = 0; i < 3; ++i) e2[i] -= n[axis] * n[i];
  const Jet len = pow(e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2], -0.5);
  for (auto& c : e2) c = c * len;
  const auto e3 = cross(n, e2);
  TensorJ w2(4, 2), w3(4, 2);
  for (int i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < w2.size(); ++k) {
      w2.data()[k] += e2[i] * basis[i].data()[k];
      w3.data()[k] += e3[i] * basis[i].data()[k];
    }
  const TensorD w1v = values(w1), w2v = values(w2), w3v = values(w3);
  const TensorD ix1 = interior_value(X, w1v), ix2 = interior_value(X, w2v),
                ix3 = interior_value(X, w3v);

  MomentEquationResiduals r;
  const auto dw1 = covariant_derivative_2form(w1, gam);
  for (int k = 0; k < 4; ++k) {
    r.dmu1 = std::max(r.dmu1, std::abs(mu1.grad(k) - ix1(k)));
    const TensorD dwk = values(dw1[k]);
    const double theta2 = 0.5 * form_inner(ginv, dwk, w3v);
    const double theta3 = -0.5 * form_inner(ginv, dwk, w2v);
    r.theta2 = std::max(r.theta2, std::abs(mu1.value() * theta2 - ix3(k)));
    r.theta3 = std::max(r.theta3, std::abs(mu1.value() * theta3 + ix2(k)));
  }
  // nabla mu = sum_i i_X w_i (x) w_i, frame independent
  const auto dmu = covariant_derivative_2form(mu, gam);
  std::array<TensorD, 3> bw = {values(basis[0]), values(basis[1]), values(basis[2])};
  std::array<TensorD, 3> ixb = {interior_value(X, bw[0]), interior_value(X, bw[1]),
                                interior_value(X, bw[2])};
  for (int k = 0; k < 4; ++k)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double rhs = 0.0;
        for (int i = 0; i < 3; ++i) rhs += ixb[i](k) * bw[i](a, b);
        r.covariant = std::max(r.covariant, std::abs(dmu[k](a, b).value() - rhs));
      }
  return r;
}

TensorJ alpha_from_moment(const MomentSection4d& ms, const Point& x, int order) {
  const Jet m = ms.mu1(x, order + 1);
  const Jet inv = -0.5 / m.truncated(order);
  TensorJ a(4, 1);
  for (int i = 0; i < 4; ++i) a(i) = m.derivative(i) * inv;
  return a;
}

TensorD alpha_algebraic(const MomentSection4d& ms, const Point& x) {
  const TensorD mu = values(ms.section(x, 0));
  const double m = ms.mu1(x, 0).value();
  TensorD a = interior_value(ms.killing_field().value(x), mu);
  for (auto& c : a.data()) c *= -0.5 / (m * m);
  return a;
}

template <typename T>
Tensor<T> modification_tensor(const Tensor<T>& alpha, const std::array<Tensor<T>, 3>& ijk) {
  const int n = alpha.dim();
  // (alpha I_l)_j = alpha_m (I_l)^m_j
  std::array<Tensor<T>, 3> aI;
  for (int l = 0; l < 3; ++l) {
    aI[l] = Tensor<T>(n, 1);
    for (int j = 0; j < n; ++j) {
      T s(0.0);
      for (int m = 0; m < n; ++m) s += alpha(m) * ijk[l](m, j);
      aI[l](j) = s;
    }
  }
  Tensor<T> S(n, 3);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        T s(0.0);
        if (k == j) s += alpha(i);
        if (k == i) s += alpha(j);
        for (int l = 0; l < 3; ++l) s -= aI[l](j) * ijk[l](k, i) + aI[l](i) * ijk[l](k, j);
        S(k, i, j) = s;
      }
  return S;
}

template TensorD modification_tensor(const TensorD&, const std::array<TensorD, 3>&);
template TensorJ modification_tensor(const TensorJ&, const std::array<TensorJ, 3>&);

double modification_trace_residual(const TensorD& S, const TensorD& alpha) {
  const int n = S.dim();
  const double weight = n + 4;  // 4m + 4
  double r = 0.0;
  for (int i = 0; i < n; ++i) {
    double tr = 0.0;
    for (int j = 0; j < n; ++j) tr += S(j, i, j);
    r = std::max(r, std::abs(tr - weight * alpha(i)));
  }
  return r;
}

ConnectionField modified_connection(const ConnectionField& base, OneFormEvaluator alpha,
                                    const QuaternionicTriple& triple) {
  auto eval = [base, alpha, triple](const Point& x, int order) {
    TensorJ gam = base.eval(x, order);
    const TensorJ S = modification_tensor(alpha(x, order), triple.eval(x, order));
    for (std::size_t k = 0; k < gam.size(); ++k) gam.data()[k] += S.data()[k];
    return gam;
  };
  return ConnectionField(Field(base.chart_ptr(), 3, Evaluator(eval)));
}

QuaternionicTriple rotated_triple(const QuaternionicTriple& t, const std::array<double, 9>& R) {
  QuaternionicTriple out;
  out.chart = t.chart;
  auto e = t.eval;
  out.eval = [e, R](const Point& x, int order) {
    const auto q = e(x, order);
    std::array<TensorJ, 3> r;
    for (int a = 0; a < 3; ++a) {
      r[a] = TensorJ(q[0].dim(), 2);
      for (int b = 0; b < 3; ++b)
        for (std::size_t k = 0; k < r[a].size(); ++k) r[a].data()[k] += R[a * 3 + b] * q[b].data()[k];
    }
    return r;
  };
  return out;
}

UStarConstruction qk_to_ustar(const MetricField& g, const VectorField& X,
                              std::span<const Point> calibration_samples) {
  MomentSection4d ms = moment_section_4d(g, X, calibration_samples);
  OneFormEvaluator alpha = [ms](const Point& x, int order) {
    return alpha_from_moment(ms, x, order);
  };
  UStarConstruction c{g, ms, modified_connection(levi_civita(g), alpha, coframe_triple(g)),
                      ms.complex_structure(), ms.mu1_field(), 1};
  return c;
}

MetricField rescaled_metric(const MetricField& g, const ScalarField& mu1) {
  auto eval = [g, mu1](const Point& x, int order) {
    TensorJ G = g.eval(x, order);
    const Jet f = pow(mu1.eval_scalar(x, order), -2.0);
    for (auto& c : G.data()) c = c * f;
    return G;
  };
  return MetricField(Field(g.chart_ptr(), 2, Evaluator(eval)), g.signature);
}

double parallel_residual(const ConnectionField& conn, const AlmostComplexField& I, const Point& x) {
  const TensorJ Ij = I.eval(x, 1);
  const TensorD I0 = values(Ij);
  const TensorD gam = conn.value(x);
  const int n = I0.dim();
  double r = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = Ij(i, j).grad(k);
        for (int m = 0; m < n; ++m) s += gam(i, k, m) * I0(m, j) - gam(m, k, j) * I0(i, m);
        r = std::max(r, std::abs(s));
      }
  return r;
}

double volume_residual(const ConnectionField& conn, const ScalarField& mu1, const MetricField& g,
                       int m, const Point& x) {
  const Jet logf = -(2.0 * m + 2.0) * log(mu1.eval_scalar(x, 1)) +
                   0.5 * log(determinant(g.eval(x, 1)));
  const TensorD gam = conn.value(x);
  const int n = gam.dim();
  double r = 0.0;
  for (int k = 0; k < n; ++k) {
    double tr = 0.0;
    for (int j = 0; j < n; ++j) tr += gam(j, k, j);
    r = std::max(r, std::abs(logf.grad(k) - tr));
  }
  return r;
}

Report verify_ustar(const UStarConstruction& c, std::span<const Point> points, VerifyOptions opt) {
  Report rep;
  rep.kind = "verify_ustar";
  Check par{"parallel_complex_structure"}, tor{"torsion"}, vol{"invariant_volume"},
      trace{"trace_constant"};
  par.tolerance = tor.tolerance = vol.tolerance = opt.tol;
  trace.tolerance = 1e-10;
  trace.note = "trace of the modification equals (4m+4) alpha; the (4m+2) figure is not reproduced";
  long long skipped = 0, used = 0;
  const auto triple = coframe_triple(c.g);
  for (const Point& x : points) {
    try {
      const double a = parallel_residual(c.connection, c.I, x);
      const double b = torsion_residual(c.connection, x);
      const double v = volume_residual(c.connection, c.mu1, c.g, c.m, x);
      const TensorD alpha = values(alpha_from_moment(c.moment, x, 0));
      const auto q = triple.value(x);
      const double t = modification_trace_residual(modification_tensor(alpha, q), alpha);
      par.observe(a, x);
      tor.observe(b, x);
      vol.observe(v, x);
      trace.observe(t, x);
      ++used;
    } catch (const GeometryError& e) {
      if (e.kind() != ErrorKind::ZeroMoment) throw;
      ++skipped;
    }
  }
  for (Check* ch : {&par, &tor, &vol, &trace}) {
    ch->finish();
    if (used == 0) ch->pass = false;
    rep.checks.push_back(*ch);
  }
  rep.set("m", static_cast<long long>(c.m));
  rep.set("points", used);
  rep.set("skipped_zero_moment", skipped);
  rep.set("calibration", c.moment.calibration());
  rep.set("trace_weight", std::string("4m+4"));
  return rep;
}

}  // namespace ustar
