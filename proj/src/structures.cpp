#include "ustar/structures.hpp"

#include <cmath>

namespace ustar {

TensorD standard_complex_structure(int n) {
  if (n % 2 != 0) throw GeometryError(ErrorKind::OddDimension, "complex structure needs even n");
  TensorD J(n, 2);
  for (int a = 0; a < n / 2; ++a) {
    J(2 * a + 1, 2 * a) = 1.0;
    J(2 * a, 2 * a + 1) = -1.0;
  }
  return J;
}

AlmostComplexField constant_complex_structure(ChartPtr chart, const TensorD& J) {
  const int n = chart->dim;
  auto f = [J, n](std::span<const Jet>) {
    TensorJ t(n, 2);
    for (std::size_t k = 0; k < t.size(); ++k) t.data()[k] = J.data()[k];
    return t;
  };
  return AlmostComplexField(Field(std::move(chart), 2, JetFormula(f)));
}

std::array<TensorD, 3> QuaternionicTriple::value(const Point& x) const {
  chart->require(x);
  auto t = eval(x, 0);
  return {values(t[0]), values(t[1]), values(t[2])};
}

AlmostComplexField QuaternionicTriple::component(int i) const {
  auto e = eval;
  return AlmostComplexField(
      Field(chart, 2, Evaluator([e, i](const Point& x, int order) { return e(x, order)[i]; })));
}

QuaternionicTriple constant_triple(ChartPtr chart, std::array<TensorD, 3> ijk) {
  QuaternionicTriple t;
  t.chart = chart;
  t.eval = [ijk](const Point&, int) {
    std::array<TensorJ, 3> out;
    for (int i = 0; i < 3; ++i) {
      out[i] = TensorJ(ijk[i].dim(), 2);
      for (std::size_t k = 0; k < ijk[i].size(); ++k) out[i].data()[k] = ijk[i].data()[k];
    }
    return out;
  };
  return t;
}

double quaternion_relation_residual(const std::array<TensorD, 3>& q) {
  const int n = q[0].dim();
  const TensorD id = identity<double>(n);
  double r = 0.0;
  for (int i = 0; i < 3; ++i) {
    const TensorD& a = q[i];
    const TensorD& b = q[(i + 1) % 3];
    const TensorD& c = q[(i + 2) % 3];
    r = std::max(r, max_abs_diff(matmul(a, b), c));
    TensorD sq = matmul(a, a);
    for (std::size_t k = 0; k < sq.size(); ++k) sq.data()[k] += id.data()[k];
    r = std::max(r, max_abs(sq));
  }
  return r;
}

double isometry_residual(const TensorD& g, const std::array<TensorD, 3>& q) {
  double r = 0.0;
  for (const auto& E : q) r = std::max(r, max_abs_diff(matmul(transpose(E), matmul(g, E)), g));
  return r;
}

template <typename T>
Tensor<T> form_from_endomorphism(const Tensor<T>& g, const Tensor<T>& E) {
  const int n = g.dim();
  Tensor<T> w(n, 2);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      T s(0.0);
      for (int c = 0; c < n; ++c) s += g(c, b) * E(c, a);
      w(a, b) = s;
    }
  return w;
}

template <typename T>
Tensor<T> endomorphism_from_form(const Tensor<T>& ginv, const Tensor<T>& w) {
  const int n = ginv.dim();
  Tensor<T> E(n, 2);
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < n; ++a) {
      T s(0.0);
      for (int b = 0; b < n; ++b) s += ginv(c, b) * w(a, b);
      E(c, a) = s;
    }
  return E;
}

template TensorD form_from_endomorphism(const TensorD&, const TensorD&);
template TensorJ form_from_endomorphism(const TensorJ&, const TensorJ&);
template TensorD endomorphism_from_form(const TensorD&, const TensorD&);
template TensorJ endomorphism_from_form(const TensorJ&, const TensorJ&);

TensorJ orthonormal_coframe(const TensorJ& g) {
  const int n = g.dim();
  const TensorJ ginv = inverse(g);
  TensorJ C(n, 2);
  auto inner = [&](int a, const std::vector<Jet>& v) {
    Jet s(0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += C(a, i) * ginv(i, j) * v[j];
    return s;
  };
  for (int a = 0; a < n; ++a) {
    std::vector<Jet> v(n, Jet(0.0));
    v[a] = Jet(1.0);
    for (int b = 0; b < a; ++b) {
      const Jet p = inner(b, v);
      for (int i = 0; i < n; ++i) v[i] -= p * C(b, i);
    }
    Jet norm2(0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) norm2 += v[i] * ginv(i, j) * v[j];
    const Jet inv_norm = pow(norm2, -0.5);
    for (int i = 0; i < n; ++i) C(a, i) = v[i] * inv_norm;
  }
  return C;
}

namespace {
TensorJ row(const TensorJ& C, int a) {
  TensorJ r(C.dim(), 1);
  for (int i = 0; i < C.dim(); ++i) r(i) = C(a, i);
  return r;
}
TensorJ sum(const TensorJ& a, const TensorJ& b) {
  TensorJ s = a;
  for (std::size_t k = 0; k < s.size(); ++k) s.data()[k] += b.data()[k];
  return s;
}
}  // namespace

std::array<TensorJ, 3> self_dual_basis(const TensorJ& C) {
  if (C.dim() != 4) throw GeometryError(ErrorKind::InvalidInput, "self-dual basis needs dim 4");
  const TensorJ e0 = row(C, 0), e1 = row(C, 1), e2 = row(C, 2), e3 = row(C, 3);
  return {sum(wedge(e0, e1), wedge(e2, e3)), sum(wedge(e0, e2), wedge(e3, e1)),
          sum(wedge(e0, e3), wedge(e1, e2))};
}

QuaternionicTriple coframe_triple(const MetricField& g) {
  QuaternionicTriple t;
  t.chart = g.chart_ptr();
  t.eval = [g](const Point& x, int order) {
    const TensorJ G = g.eval(x, order);
    const TensorJ ginv = inverse(G);
    const auto w = self_dual_basis(orthonormal_coframe(G));
    return std::array<TensorJ, 3>{endomorphism_from_form(ginv, w[0]),
                                  endomorphism_from_form(ginv, w[1]),
                                  endomorphism_from_form(ginv, w[2])};
  };
  return t;
}

double nijenhuis(const AlmostComplexField& Jf, const Point& x) {
  const TensorJ Jj = Jf.eval(x, 1);
  const int n = Jj.dim();
  const TensorD J = values(Jj);
  std::vector<TensorD> dJ;
  for (int m = 0; m < n; ++m) dJ.push_back(values(derivative(Jj, m)));
  double r = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) {
          s += J(m, i) * dJ[m](k, j) - J(m, j) * dJ[m](k, i) +
               J(k, m) * (dJ[j](m, i) - dJ[i](m, j));
        }
        r = std::max(r, std::abs(s));
      }
  return r;
}

FormField kahler_form(const MetricField& g, const AlmostComplexField& J) {
  auto eval = [g, J](const Point& x, int order) {
    return form_from_endomorphism(g.eval(x, order), J.eval(x, order));
  };
  return FormField(Field(g.chart_ptr(), 2, Evaluator(eval)));
}

KahlerResiduals kahler_check(const MetricField& g, const AlmostComplexField& J, const Point& x) {
  KahlerResiduals r;
  const TensorD G = g.value(x);
  const TensorD E = J.value(x);
  r.hermitian = max_abs_diff(matmul(transpose(E), matmul(G, E)), G);
  r.closure = max_abs(ext_d(kahler_form(g, J), x));
  return r;
}

double type11_test(const TensorD& w, const TensorD& J) {
  const TensorD a = matmul(transpose(J), w);
  const TensorD b = matmul(w, J);
  double r = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) r = std::max(r, std::abs(a.data()[k] + b.data()[k]));
  return r;
}

namespace {
int levi_civita_symbol(int i, int j, int k, int l) {
  if (i == j || i == k || i == l || j == k || j == l || k == l) return 0;
  return detail::permutation_sign({i, j, k, l});
}

template <typename T>
T sqrt_abs_det(const Tensor<T>& g) {
  using std::sqrt;
  const T d = determinant(g);
  return value_of(d) < 0 ? sqrt(-d) : sqrt(d);
}
}  // namespace

template <typename T>
Tensor<T> hodge_star_4d(const Tensor<T>& g, const Tensor<T>& w) {
  if (g.dim() != 4 || w.rank() != 2) {
    throw GeometryError(ErrorKind::InvalidInput, "hodge_star_4d acts on 2-forms in dimension 4");
  }
  const Tensor<T> ginv = inverse(g);
  Tensor<T> up(4, 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      T s(0.0);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) s += ginv(i, a) * ginv(j, b) * w(a, b);
      up(i, j) = s;
    }
  const T vol = sqrt_abs_det(g);
  Tensor<T> out(4, 2);
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) {
      T s(0.0);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          const int e = levi_civita_symbol(i, j, k, l);
          if (e != 0) s += e > 0 ? up(i, j) : -up(i, j);
        }
      out(k, l) = 0.5 * vol * s;
    }
  return out;
}

template TensorD hodge_star_4d(const TensorD&, const TensorD&);
template TensorJ hodge_star_4d(const TensorJ&, const TensorJ&);

template <typename T>
T form_inner(const Tensor<T>& ginv, const Tensor<T>& a, const Tensor<T>& b) {
  const int n = ginv.dim();
  T s(0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) s += a(i, j) * ginv(i, p) * ginv(j, q) * b(p, q);
  return 0.5 * s;
}

template double form_inner(const TensorD&, const TensorD&, const TensorD&);
template Jet form_inner(const TensorJ&, const TensorJ&, const TensorJ&);

template <typename T>
Tensor<T> volume_form_4d(const Tensor<T>& g) {
  Tensor<T> v(4, 4);
  const std::array<int, 4> idx = {0, 1, 2, 3};
  set_alternating(v, std::span<const int>(idx), sqrt_abs_det(g));
  return v;
}

template TensorD volume_form_4d(const TensorD&);
template TensorJ volume_form_4d(const TensorJ&);

double top_coefficient(const TensorD& four_form) { return four_form(0, 1, 2, 3); }

// ---------------------------------------------------------------------------

MetricField to_real_metric(const ComplexChartMetric& h) {
  const int m = h.m;
  auto hf = h.h;
  return metric_from_formula(h.chart, {2 * m, 0}, [hf, m](std::span<const Jet> x) {
    auto [re, im] = hf(x);
    TensorJ G(2 * m, 2);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        G(2 * a, 2 * b) = re(a, b);
        G(2 * a + 1, 2 * b + 1) = re(a, b);
        G(2 * a, 2 * b + 1) = im(a, b);
        G(2 * a + 1, 2 * b) = -im(a, b);
      }
    return G;
  });
}

std::pair<TensorD, TensorD> hermitian_of(const TensorD& g) {
  const int m = g.dim() / 2;
  TensorD re(m, 2), im(m, 2);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      re(a, b) = g(2 * a, 2 * b);
      im(a, b) = g(2 * a, 2 * b + 1);
    }
  return {re, im};
}

namespace {

// dd^c F / 2 for a scalar jet F, one order lower by two.
TensorJ half_ddc(const Jet& F, int n) {
  const TensorD J0 = standard_complex_structure(n);
  TensorJ dc(n, 1);
  std::vector<Jet> dF;
  for (int j = 0; j < n; ++j) dF.push_back(F.derivative(j));
  for (int i = 0; i < n; ++i) {
    Jet s(0.0);
    for (int j = 0; j < n; ++j) {
      if (J0(j, i) != 0.0) s -= J0(j, i) * dF[j];
    }
    dc(i) = s;
  }
  TensorJ out = ext_d(dc);
  for (auto& c : out.data()) c = 0.5 * c;
  return out;
}

}  // namespace

FormField ricci_form(const MetricField& g) {
  auto eval = [g](const Point& x, int order) {
    const TensorJ G = g.eval(x, order + 2);
    const Jet det = determinant(G);
    if (!(det.value() > 0.0)) {
      throw GeometryError(ErrorKind::DegenerateMetric, "ricci_form: det g must be positive");
    }
    TensorJ rho = half_ddc(0.5 * log(det), G.dim());
    for (auto& c : rho.data()) c = -c;
    return rho;
  };
  return FormField(Field(g.chart_ptr(), 2, Evaluator(eval)));
}

TensorD ricci_form(const MetricField& g, const Point& x) { return ricci_form(g).value(x); }

TensorD ricci_form(const ComplexChartMetric& h, const Point& x) {
  return ricci_form(to_real_metric(h), x);
}

TensorD i_ddbar(const ScalarField& f, const Point& x) {
  return values(half_ddc(f.eval_scalar(x, 2), f.dim()));
}

PotentialResult kahler_potential_check(const ScalarField& f, const FormField& target,
                                       const Point& x, std::optional<double> fixed_scale) {
  const TensorD P = i_ddbar(f, x);
  const TensorD T = target.value(x);
  PotentialResult r;
  if (fixed_scale) {
    r.scale = *fixed_scale;
  } else {
    double pt = 0.0, tt = 0.0;
    for (std::size_t k = 0; k < P.size(); ++k) {
      pt += P.data()[k] * T.data()[k];
      tt += T.data()[k] * T.data()[k];
    }
    r.scale = tt > 0.0 ? pt / tt : 0.0;
  }
  for (std::size_t k = 0; k < P.size(); ++k) {
    r.residual = std::max(r.residual, std::abs(P.data()[k] - r.scale * T.data()[k]));
  }
  return r;
}

double kahler_scalar_curvature(const MetricField& g, const Point& x) {
  return 0.5 * ricci_scalar(g, x);
}

}  // namespace ustar
