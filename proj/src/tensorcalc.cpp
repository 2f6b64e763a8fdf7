#include "ustar/tensorcalc.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace ustar {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::DegenerateMetric: return "DegenerateMetric";
    case ErrorKind::NotKilling: return "NotKilling";
    case ErrorKind::ZeroMoment: return "ZeroMoment";
    case ErrorKind::NotMomentMap: return "NotMomentMap";
    case ErrorKind::OffLevelSet: return "OffLevelSet";
    case ErrorKind::GaugeDegenerate: return "GaugeDegenerate";
    case ErrorKind::OddDimension: return "OddDimension";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorKind::UnknownEntry: return "UnknownEntry";
    case ErrorKind::NoKillingField: return "NoKillingField";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

bool Chart::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim) return false;
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return !domain || domain(x);
}

void Chart::require(std::span<const double> x) const {
  if (!contains(x)) {
    std::ostringstream os;
    os << "point (";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ") is outside chart '" << name << "'";
    throw GeometryError(ErrorKind::DomainViolation, os.str());
  }
}

ChartPtr make_chart(std::string name, std::vector<std::string> labels,
                    std::function<bool(std::span<const double>)> domain) {
  if (labels.empty()) throw GeometryError(ErrorKind::InvalidInput, "chart needs dim >= 1");
  auto c = std::make_shared<Chart>();
  c->name = std::move(name);
  c->dim = static_cast<int>(labels.size());
  c->coord_labels = std::move(labels);
  c->domain = std::move(domain);
  return c;
}

Field::Field(ChartPtr chart, int rank, Evaluator eval)
    : chart_(std::move(chart)), rank_(rank), eval_(std::move(eval)) {}

Field::Field(ChartPtr chart, int rank, JetFormula formula)
    : chart_(std::move(chart)), rank_(rank), formula_(std::move(formula)) {
  eval_ = [f = formula_](const Point& x, int order) { return f(seed(x, order)); };
}

TensorJ Field::eval(const Point& x, int order) const {
  chart_->require(x);
  return eval_(x, order);
}

TensorJ Field::eval_jets(std::span<const Jet> coords) const {
  if (!formula_) {
    throw GeometryError(ErrorKind::InvalidInput, "field has no closed-form formula");
  }
  return formula_(coords);
}

// ---------------------------------------------------------------------------

ScalarField scalar_field(ChartPtr chart, std::function<Jet(std::span<const Jet>)> f) {
  const int n = chart->dim;
  return ScalarField(Field(chart, 0, JetFormula([f, n](std::span<const Jet> x) {
                             TensorJ t(n, 0);
                             t(0) = f(x);
                             return t;
                           })));
}

VectorField vector_field(ChartPtr chart,
                         std::function<std::vector<Jet>(std::span<const Jet>)> f) {
  const int n = chart->dim;
  return VectorField(Field(chart, 1, JetFormula([f, n](std::span<const Jet> x) {
                             TensorJ t(n, 1);
                             auto v = f(x);
                             for (int i = 0; i < n; ++i) t(i) = v[i];
                             return t;
                           })));
}

MetricField metric_from_formula(ChartPtr chart, Signature sig, JetFormula f) {
  return MetricField(Field(std::move(chart), 2, std::move(f)), sig);
}

MetricField diagonal_metric(ChartPtr chart,
                            std::function<std::vector<Jet>(std::span<const Jet>)> diag) {
  const int n = chart->dim;
  return metric_from_formula(chart, {n, 0}, [diag, n](std::span<const Jet> x) {
    TensorJ g(n, 2);
    auto d = diag(x);
    for (int i = 0; i < n; ++i) g(i, i) = d[i];
    return g;
  });
}

MetricField coframe_metric(
    ChartPtr chart,
    std::function<std::pair<std::vector<Jet>, TensorJ>(std::span<const Jet>)> weights_coframe) {
  const int n = chart->dim;
  return metric_from_formula(chart, {n, 0}, [weights_coframe, n](std::span<const Jet> x) {
    auto [w, c] = weights_coframe(x);
    TensorJ g(n, 2);
    for (int a = 0; a < n; ++a) {
      for (int i = 0; i < n; ++i) {
        if (c(a, i).is_constant_only() && c(a, i).value() == 0.0) continue;
        const Jet wi = w[a] * c(a, i);
        for (int j = 0; j < n; ++j) g(i, j) += wi * c(a, j);
      }
    }
    return g;
  });
}

MetricField euclidean_metric(ChartPtr chart) {
  const int n = chart->dim;
  return metric_from_formula(chart, {n, 0}, [n](std::span<const Jet>) {
    return identity<Jet>(n);
  });
}

MetricField conformal_rescale(const MetricField& g, const ScalarField& f) {
  auto eval = [g, f](const Point& x, int order) {
    TensorJ out = g.eval(x, order);
    const Jet s = f.eval(x, order)(0);
    for (auto& c : out.data()) c = c * s;
    return out;
  };
  return MetricField(Field(g.chart_ptr(), 2, Evaluator(eval)), g.signature);
}

MetricField pullback_metric(const MetricField& g, ChartPtr source,
                            std::function<std::vector<Jet>(std::span<const Jet>)> map) {
  const int n = source->dim;
  if (n != g.dim()) {
    throw GeometryError(ErrorKind::InvalidInput, "pullback_metric: dimension mismatch");
  }
  auto eval = [g, map, n](const Point& x, int order) {
    auto y = map(seed(x, order + 1));
    TensorJ jac(n, 2);
    std::vector<Jet> yt(n);
    for (int a = 0; a < n; ++a) {
      yt[a] = y[a].truncated(order);
      for (int i = 0; i < n; ++i) jac(a, i) = y[a].derivative(i);
    }
    Point ypt(n);
    for (int a = 0; a < n; ++a) ypt[a] = yt[a].value();
    g.chart().require(ypt);
    const TensorJ G = g.eval_jets(yt);
    TensorJ out(n, 2);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet s(0.0);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) s += jac(a, i) * G(a, b) * jac(b, j);
        out(i, j) = s;
        out(j, i) = s;
      }
    return out;
  };
  return MetricField(Field(std::move(source), 2, Evaluator(eval)), g.signature);
}

// ---------------------------------------------------------------------------

void require_nondegenerate(const TensorD& g) {
  const int n = g.dim();
  double rows = 1.0;
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    for (int j = 0; j < n; ++j) r += g(i, j) * g(i, j);
    rows *= std::sqrt(r);
  }
  const double det = determinant(g);
  if (!(std::abs(det) > kDegeneracyTol * rows)) {
    throw GeometryError(ErrorKind::DegenerateMetric,
                        "|det g| = " + std::to_string(std::abs(det)) +
                            " below degeneracy tolerance");
  }
}

Signature signature_of(const TensorD& g) {
  const int n = g.dim();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Signature s;
  for (int i = 0; i < n; ++i) {
    if (es.eigenvalues()(i) > 0) ++s.positive;
    if (es.eigenvalues()(i) < 0) ++s.negative;
  }
  return s;
}

namespace {

TensorJ christoffel_jets(const TensorJ& G, int order) {
  const int n = G.dim();
  const TensorJ g0 = truncated(G, order);
  const TensorJ ginv = inverse(g0);
  std::vector<TensorJ> dg;
  dg.reserve(n);
  for (int i = 0; i < n; ++i) dg.push_back(derivative(G, i));
  // first kind: [ij,l] = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
  TensorJ first(n, 3);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const Jet v = 0.5 * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
        first(l, i, j) = v;
        first(l, j, i) = v;
      }
  TensorJ gamma(n, 3);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet s(0.0);
        for (int l = 0; l < n; ++l) s += ginv(k, l) * first(l, i, j);
        gamma(k, i, j) = s;
        gamma(k, j, i) = s;
      }
  return gamma;
}

}  // namespace

ConnectionField levi_civita(const MetricField& g) {
  auto eval = [g](const Point& x, int order) {
    const TensorJ G = g.eval(x, order + 1);
    require_nondegenerate(values(G));
    return christoffel_jets(G, order);
  };
  return ConnectionField(Field(g.chart_ptr(), 3, Evaluator(eval)));
}

TensorD christoffel(const MetricField& g, const Point& x) {
  return levi_civita(g).value(x);
}

TensorD riemann(const ConnectionField& conn, const Point& x) {
  const TensorJ G = conn.eval(x, 1);
  const int n = G.dim();
  const TensorD g0 = values(G);
  std::vector<TensorD> dG;
  for (int m = 0; m < n; ++m) dG.push_back(values(derivative(G, m)));
  TensorD R(n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          double s = dG[k](i, l, j) - dG[l](i, k, j);
          for (int m = 0; m < n; ++m) s += g0(i, k, m) * g0(m, l, j) - g0(i, l, m) * g0(m, k, j);
          R(i, j, k, l) = s;
          R(i, j, l, k) = -s;
        }
  return R;
}

TensorD ricci(const ConnectionField& conn, const Point& x) {
  const TensorD R = riemann(conn, x);
  const int n = R.dim();
  TensorD ric(n, 2);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += R(i, j, i, l);
      ric(j, l) = s;
    }
  return ric;
}

TensorD riemann(const MetricField& g, const Point& x) { return riemann(levi_civita(g), x); }

TensorD ricci(const MetricField& g, const Point& x) { return ricci(levi_civita(g), x); }

double ricci_scalar(const MetricField& g, const Point& x) {
  const TensorD ric = ricci(levi_civita(g), x);
  const TensorD ginv = inverse(g.value(x));
  double s = 0.0;
  for (int j = 0; j < ric.dim(); ++j)
    for (int l = 0; l < ric.dim(); ++l) s += ginv(j, l) * ric(j, l);
  return s;
}

namespace {
TensorD lowered_riemann(const TensorD& g, const TensorD& R) {
  const int n = g.dim();
  TensorD out(n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int m = 0; m < n; ++m) s += g(i, m) * R(m, j, k, l);
          out(i, j, k, l) = s;
        }
  return out;
}
}  // namespace

double sectional_curvature(const MetricField& g, const Point& x, std::span<const double> u,
                           std::span<const double> v) {
  const TensorD G = g.value(x);
  const TensorD R = lowered_riemann(G, riemann(levi_civita(g), x));
  const int n = G.dim();
  double num = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) num += R(i, j, k, l) * u[i] * v[j] * u[k] * v[l];
  auto dot = [&](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += G(i, j) * a[i] * b[j];
    return s;
  };
  return num / (dot(u, u) * dot(v, v) - dot(u, v) * dot(u, v));
}

std::pair<double, double> constant_curvature_fit(const MetricField& g, const Point& x) {
  const TensorD G = g.value(x);
  const TensorD R = lowered_riemann(G, riemann(levi_civita(g), x));
  const int n = G.dim();
  TensorD T(n, 4);
  double rt = 0.0, tt = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double t = G(i, k) * G(j, l) - G(i, l) * G(j, k);
          T(i, j, k, l) = t;
          rt += R(i, j, k, l) * t;
          tt += t * t;
        }
  const double kappa = rt / tt;
  double res = 0.0;
  for (std::size_t a = 0; a < R.size(); ++a) {
    res = std::max(res, std::abs(R.data()[a] - kappa * T.data()[a]));
  }
  return {kappa, res};
}

std::pair<double, double> einstein_fit(const MetricField& g, const Point& x) {
  const TensorD G = g.value(x);
  const TensorD ric = ricci(levi_civita(g), x);
  const TensorD ginv = inverse(G);
  const int n = G.dim();
  double scal = 0.0;
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) scal += ginv(j, l) * ric(j, l);
  const double lambda = scal / n;
  double res = 0.0;
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) res = std::max(res, std::abs(ric(j, l) - lambda * G(j, l)));
  return {lambda, res};
}

double riemann_norm_squared(const MetricField& g, const Point& x) {
  const TensorD G = g.value(x);
  const TensorD ginv = inverse(G);
  const TensorD R = riemann(levi_civita(g), x);
  const int n = G.dim();
  // raise the lower three indices, then contract with R_ijkl = g_im R^m_jkl
  TensorD up(n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
              for (int d = 0; d < n; ++d) s += ginv(j, b) * ginv(k, c) * ginv(l, d) * R(i, b, c, d);
          up(i, j, k, l) = s;
        }
  const TensorD low = lowered_riemann(G, R);
  double s = 0.0;
  for (std::size_t a = 0; a < low.size(); ++a) s += low.data()[a] * up.data()[a];
  return s;
}

double torsion_residual(const ConnectionField& conn, const Point& x) {
  const TensorD G = conn.value(x);
  const int n = G.dim();
  double res = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) res = std::max(res, std::abs(G(k, i, j) - G(k, j, i)));
  return res;
}

double metric_compatibility_residual(const MetricField& g, const ConnectionField& conn,
                                     const Point& x) {
  const TensorJ gj = g.eval(x, 1);
  const TensorD G = values(gj);
  const TensorD gam = conn.value(x);
  const int n = G.dim();
  double res = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = gj(i, j).grad(k);
        for (int m = 0; m < n; ++m) s -= gam(m, k, i) * G(m, j) + gam(m, k, j) * G(i, m);
        res = std::max(res, std::abs(s));
      }
  return res;
}

double bianchi_residual(const ConnectionField& conn, const Point& x) {
  const TensorD R = riemann(conn, x);
  const int n = R.dim();
  double res = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          res = std::max(res, std::abs(R(i, j, k, l) + R(i, k, l, j) + R(i, l, j, k)));
  return res;
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
Tensor<T> wedge_impl(const Tensor<T>& a, const Tensor<T>& b) {
  const int n = std::max(a.dim(), b.dim());
  const int p = a.rank();
  const int q = b.rank();
  Tensor<T> out(n, p + q);
  if (p == 0 || q == 0) {
    const T s = (p == 0) ? a(0) : b(0);
    const Tensor<T>& f = (p == 0) ? b : a;
    out = f;
    for (auto& c : out.data()) c = c * s;
    return out;
  }
  std::vector<int> ia(p), ib(q);
  for_each_increasing(n, p + q, [&](std::span<const int> I) {
    T sum(0.0);
    // choose positions of I for the first factor (increasing subsets)
    for_each_increasing(p + q, p, [&](std::span<const int> pos) {
      std::vector<int> perm;
      std::vector<bool> used(p + q, false);
      for (int a_ = 0; a_ < p; ++a_) {
        ia[a_] = I[pos[a_]];
        used[pos[a_]] = true;
        perm.push_back(pos[a_]);
      }
      int bi = 0;
      for (int c = 0; c < p + q; ++c) {
        if (!used[c]) {
          ib[bi++] = I[c];
          perm.push_back(c);
        }
      }
      const T term = a.at(ia) * b.at(ib);
      sum += detail::permutation_sign(perm) > 0 ? term : -term;
    });
    set_alternating(out, I, sum);
  });
  return out;
}

}  // namespace

TensorJ wedge(const TensorJ& a, const TensorJ& b) { return wedge_impl(a, b); }
TensorD wedge(const TensorD& a, const TensorD& b) { return wedge_impl(a, b); }

TensorJ ext_d(const TensorJ& w) {
  const int n = w.dim();
  const int p = w.rank();
  std::vector<TensorJ> dw;
  for (int i = 0; i < n; ++i) dw.push_back(derivative(w, i));
  TensorJ out(n, p + 1);
  std::vector<int> rest(p);
  for_each_increasing(n, p + 1, [&](std::span<const int> I) {
    Jet s(0.0);
    for (int a = 0; a <= p; ++a) {
      int r = 0;
      for (int b = 0; b <= p; ++b)
        if (b != a) rest[r++] = I[b];
      const Jet& term = dw[I[a]].at(rest);
      if (a % 2 == 0) s += term; else s -= term;
    }
    set_alternating(out, I, s);
  });
  return out;
}

FormField ext_d(const FormField& w) {
  auto eval = [w](const Point& x, int order) { return ext_d(w.eval(x, order + 1)); };
  return FormField(Field(w.chart_ptr(), w.degree() + 1, Evaluator(eval)));
}

TensorD ext_d(const FormField& w, const Point& x) { return values(ext_d(w.eval(x, 1))); }

TensorJ interior(const TensorJ& X, const TensorJ& w) {
  const int n = w.dim();
  const int p = w.rank();
  TensorJ out(n, p - 1);
  const std::size_t stride = out.size();
  for (std::size_t r = 0; r < stride; ++r) {
    Jet s(0.0);
    for (int i = 0; i < n; ++i) s += X(i) * w.data()[i * stride + r];
    out.data()[r] = s;
  }
  return out;
}

FormField interior(const VectorField& X, const FormField& w) {
  auto eval = [X, w](const Point& x, int order) {
    return interior(X.eval(x, order), w.eval(x, order));
  };
  return FormField(Field(w.chart_ptr(), w.degree() - 1, Evaluator(eval)));
}

FormField wedge(const FormField& a, const FormField& b) {
  auto eval = [a, b](const Point& x, int order) {
    return wedge(a.eval(x, order), b.eval(x, order));
  };
  return FormField(Field(a.chart_ptr(), a.degree() + b.degree(), Evaluator(eval)));
}

FormField operator+(const FormField& a, const FormField& b) {
  auto eval = [a, b](const Point& x, int order) {
    TensorJ s = a.eval(x, order);
    const TensorJ t = b.eval(x, order);
    for (std::size_t k = 0; k < s.size(); ++k) s.data()[k] += t.data()[k];
    return s;
  };
  return FormField(Field(a.chart_ptr(), a.degree(), Evaluator(eval)));
}

FormField scaled(const FormField& w, double s) {
  auto eval = [w, s](const Point& x, int order) {
    TensorJ t = w.eval(x, order);
    for (auto& c : t.data()) c = c * s;
    return t;
  };
  return FormField(Field(w.chart_ptr(), w.degree(), Evaluator(eval)));
}

FormField constant_form(ChartPtr chart, const TensorD& components) {
  const int n = chart->dim;
  const int p = components.rank();
  auto f = [components, n, p](std::span<const Jet>) {
    TensorJ t(n, p);
    for (std::size_t k = 0; k < t.size(); ++k) t.data()[k] = components.data()[k];
    return t;
  };
  return FormField(Field(std::move(chart), p, JetFormula(f)));
}

// ---------------------------------------------------------------------------

TensorD flat(const MetricField& g, const Point& x, std::span<const double> v) {
  const TensorD G = g.value(x);
  TensorD out(G.dim(), 1);
  for (int i = 0; i < G.dim(); ++i)
    for (int j = 0; j < G.dim(); ++j) out(i) += G(i, j) * v[j];
  return out;
}

TensorD sharp(const MetricField& g, const Point& x, std::span<const double> a) {
  const TensorD G = g.value(x);
  require_nondegenerate(G);
  const TensorD ginv = inverse(G);
  TensorD out(G.dim(), 1);
  for (int i = 0; i < G.dim(); ++i)
    for (int j = 0; j < G.dim(); ++j) out(i) += ginv(i, j) * a[j];
  return out;
}

FormField flat(const MetricField& g, const VectorField& X) {
  auto eval = [g, X](const Point& x, int order) {
    const TensorJ G = g.eval(x, order);
    const TensorJ V = X.eval(x, order);
    const int n = G.dim();
    TensorJ out(n, 1);
    for (int i = 0; i < n; ++i) {
      Jet s(0.0);
      for (int j = 0; j < n; ++j) s += G(i, j) * V(j);
      out(i) = s;
    }
    return out;
  };
  return FormField(Field(g.chart_ptr(), 1, Evaluator(eval)));
}

double killing_residual(const MetricField& g, const VectorField& X, const Point& x) {
  const TensorJ G = g.eval(x, 1);
  const TensorJ V = X.eval(x, 1);
  const int n = G.dim();
  double res = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        s += V(k).value() * G(i, j).grad(k) + G(k, j).value() * V(k).grad(i) +
             G(i, k).value() * V(k).grad(j);
      }
      res = std::max(res, std::abs(s));
    }
  return res;
}

FormField lie_derivative(const VectorField& X, const FormField& w) {
  return ext_d(interior(X, w)) + interior(X, ext_d(w));
}

}  // namespace ustar
