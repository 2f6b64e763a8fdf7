#include "doctest.h"

#include <cmath>
#include <random>

#include "ustar/jet.hpp"

using ustar::Jet;

namespace {

// Composite test function, also evaluated in long double for the oracle.
template <typename T, typename Exp, typename Log, typename Sin, typename Cos, typename Sqrt>
T composite(const T* x, Exp e, Log l, Sin s, Cos c, Sqrt r) {
  return e(x[0] * x[1]) * s(x[2]) + l(T(2.0) + x[0] * x[0]) * c(x[1] - x[2]) +
         r(T(1.5) + x[1] * x[1] * x[2] * x[2]) / (T(3.0) + x[0]);
}

Jet f_jet(const std::vector<Jet>& x) {
  using ustar::cos;
  using ustar::exp;
  using ustar::log;
  using ustar::sin;
  using ustar::sqrt;
  return composite<Jet>(
      x.data(), [](const Jet& a) { return exp(a); }, [](const Jet& a) { return log(a); },
      [](const Jet& a) { return sin(a); }, [](const Jet& a) { return cos(a); },
      [](const Jet& a) { return sqrt(a); });
}

long double f_ld(const long double* x) {
  return composite<long double>(
      x, [](long double a) { return std::exp(a); }, [](long double a) { return std::log(a); },
      [](long double a) { return std::sin(a); }, [](long double a) { return std::cos(a); },
      [](long double a) { return std::sqrt(a); });
}

}  // namespace

TEST_CASE("jet gradient and hessian match central differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const long double h = 1e-5L;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p = {dist(rng), dist(rng), dist(rng)};
    const Jet f = f_jet(ustar::seed(p, 2));
    long double x[3] = {p[0], p[1], p[2]};
    double scale = 1.0;
    std::vector<double> g(3), H(9);
    for (int i = 0; i < 3; ++i) {
      long double a[3] = {x[0], x[1], x[2]}, b[3] = {x[0], x[1], x[2]};
      a[i] += h;
      b[i] -= h;
      g[i] = static_cast<double>((f_ld(a) - f_ld(b)) / (2 * h));
      for (int j = 0; j < 3; ++j) {
        long double pp[3] = {x[0], x[1], x[2]}, pm[3] = {x[0], x[1], x[2]},
                    mp[3] = {x[0], x[1], x[2]}, mm[3] = {x[0], x[1], x[2]};
        pp[i] += h; pp[j] += h;
        pm[i] += h; pm[j] -= h;
        mp[i] -= h; mp[j] += h;
        mm[i] -= h; mm[j] -= h;
        H[i * 3 + j] = static_cast<double>((f_ld(pp) - f_ld(pm) - f_ld(mp) + f_ld(mm)) / (4 * h * h));
      }
    }
    for (double v : g) scale = std::max(scale, std::abs(v));
    for (double v : H) scale = std::max(scale, std::abs(v));
    for (int i = 0; i < 3; ++i) {
      worst = std::max(worst, std::abs(f.grad(i) - g[i]) / scale);
      for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(f.hess(i, j) - H[i * 3 + j]) / scale);
    }
    CHECK(f.value() == doctest::Approx(static_cast<double>(f_ld(x))).epsilon(1e-14));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("higher-order coefficients of univariate functions") {
  // exp, atan and tanh derivatives at a point, to fourth order
  const Jet x = Jet::variable(1, 4, 0, 0.3);
  const Jet e = ustar::exp(x);
  for (int k = 0; k <= 4; ++k) {
    std::vector<int> ex = {k};
    CHECK(e.partial(ex) == doctest::Approx(std::exp(0.3)).epsilon(1e-14));
  }
  const Jet a = ustar::atan(x);
  std::vector<int> one = {1}, two = {2}, three = {3};
  const double v = 0.3, d = 1 + v * v;
  CHECK(a.partial(one) == doctest::Approx(1 / d));
  CHECK(a.partial(two) == doctest::Approx(-2 * v / (d * d)));
  CHECK(a.partial(three) == doctest::Approx((6 * v * v - 2) / (d * d * d)));
  const Jet t = ustar::tanh(x);
  const double th = std::tanh(v);
  CHECK(t.value() == doctest::Approx(th));
  CHECK(t.partial(one) == doctest::Approx(1 - th * th));
  CHECK(t.partial(two) == doctest::Approx(-2 * th * (1 - th * th)));
}

TEST_CASE("derivative lowers order and matches partials") {
  const auto x = ustar::seed(std::vector<double>{0.4, -0.7}, 3);
  const Jet f = x[0] * x[0] * x[0] * x[1] + ustar::sin(x[1]);
  const Jet fx = f.derivative(0);
  CHECK(fx.order() == 2);
  CHECK(fx.value() == doctest::Approx(3 * 0.16 * -0.7));
  CHECK(fx.grad(0) == doctest::Approx(6 * 0.4 * -0.7));
  CHECK(fx.hess(0, 1) == doctest::Approx(6 * 0.4));
  const Jet fyy = f.derivative(1).derivative(1);
  CHECK(fyy.value() == doctest::Approx(-std::sin(-0.7)));
}

TEST_CASE("mixed orders truncate to the lower order") {
  const auto a = ustar::seed(std::vector<double>{1.0, 2.0}, 3);
  const auto b = ustar::seed(std::vector<double>{1.0, 2.0}, 1);
  const Jet s = a[0] * a[0] + b[1];
  CHECK(s.order() == 1);
  CHECK(s.grad(0) == doctest::Approx(2.0));
  CHECK(s.grad(1) == doctest::Approx(1.0));
}

TEST_CASE("embedding into a larger variable set") {
  const auto a = ustar::seed(std::vector<double>{0.5, 1.5}, 2);
  const Jet f = a[0] * a[1] * a[1];
  std::vector<int> map = {3, 1};
  const Jet g = f.embedded(4, map);
  CHECK(g.nvars() == 4);
  CHECK(g.grad(3) == doctest::Approx(2.25));
  CHECK(g.grad(1) == doctest::Approx(1.5));
  CHECK(g.hess(1, 3) == doctest::Approx(3.0));
  CHECK(g.grad(0) == 0.0);
}
