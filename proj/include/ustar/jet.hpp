#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A Jet of order K in n variables carries every partial derivative of a
// scalar function up to total degree K at a fixed point, stored as Taylor
// coefficients over the monomials x^a with |a| <= K.  Order 2 is the usual
// value + gradient + Hessian carrier; higher orders let derived objects
// (Christoffel symbols, curvature of a conformally rescaled metric) be
// differentiated again without finite differences.

#include <boost/container/small_vector.hpp>

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <vector>

namespace ustar {

/// Monomial bookkeeping shared by all jets with the same (nvars, order).
/// Immutable after construction.
struct JetLayout {
  int nvars = 0;
  int order = 0;
  std::vector<std::vector<int>> exponents;  // graded order, index 0 is 1
  std::vector<int> degree;
  // Product table: coefficient a times coefficient b lands in target.
  struct Term {
    int a, b, target;
  };
  std::vector<Term> product_terms;
  // shift[i][k] = index of monomial k + e_i, or -1 when beyond order.
  std::vector<std::vector<int>> shift;
  std::map<std::vector<int>, int> lookup;

  int index_of(std::span<const int> exps) const;
  std::size_t size() const { return exponents.size(); }

  static std::shared_ptr<const JetLayout> get(int nvars, int order);
};

class Jet {
 public:
  using Storage = boost::container::small_vector<double, 36>;

  /// A layout-free constant that adapts to whatever it is combined with.
  Jet() : c_{0.0} {}
  Jet(double value) : c_{value} {}  // NOLINT: implicit by design of the algebra

  static Jet constant(int nvars, int order, double value);
  static Jet variable(int nvars, int order, int index, double value);

  bool is_constant_only() const { return layout_ == nullptr; }
  int nvars() const { return layout_ ? layout_->nvars : 0; }
  int order() const { return layout_ ? layout_->order : 0; }
  const JetLayout* layout() const { return layout_.get(); }

  double value() const { return c_[0]; }
  double grad(int i) const;
  double hess(int i, int j) const;
  /// Raw Taylor coefficient of the monomial with the given exponents.
  double coefficient(std::span<const int> exps) const;
  /// Partial derivative of the given multi-index order, e.g. {1,0,2} = d^3/dx0 dx2^2.
  double partial(std::span<const int> exps) const;

  /// d/dx_i as a jet one order lower.
  Jet derivative(int i) const;
  Jet truncated(int order) const;
  /// Re-express in a larger variable set; variable k maps to var_map[k].
  Jet embedded(int nvars, std::span<const int> var_map) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet operator-() const;

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);

  /// Compose with a univariate function given its Taylor coefficients
  /// f(v0), f'(v0), f''(v0)/2!, ... at v0 = value().
  Jet compose(std::span<const double> taylor) const;

  const Storage& coefficients() const { return c_; }

 private:
  void adopt(const Jet& other);

  std::shared_ptr<const JetLayout> layout_;
  Storage c_;
};

Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, double p);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet tan(const Jet& a);
Jet tanh(const Jet& a);
Jet atan(const Jet& a);
Jet square(const Jet& a);

/// Seed coordinate jets x_i = point_i + dx_i at the requested order.
std::vector<Jet> seed(std::span<const double> point, int order);

}  // namespace ustar
