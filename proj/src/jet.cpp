#include "ustar/jet.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace ustar {

namespace {

void enumerate(int nvars, int remaining, int var, std::vector<int>& current,
               std::vector<std::vector<int>>& out) {
  if (var == nvars - 1) {
    current[var] = remaining;
    out.push_back(current);
    current[var] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[var] = e;
    enumerate(nvars, remaining - e, var + 1, current, out);
  }
  current[var] = 0;
}

std::shared_ptr<const JetLayout> build_layout(int nvars, int order) {
  auto layout = std::make_shared<JetLayout>();
  layout->nvars = nvars;
  layout->order = order;
  std::vector<int> current(nvars, 0);
  for (int d = 0; d <= order; ++d) {
    enumerate(nvars, d, 0, current, layout->exponents);
  }
  const int size = static_cast<int>(layout->exponents.size());
  for (int k = 0; k < size; ++k) {
    int d = 0;
    for (int e : layout->exponents[k]) d += e;
    layout->degree.push_back(d);
    layout->lookup.emplace(layout->exponents[k], k);
  }
  for (int a = 0; a < size; ++a) {
    for (int b = 0; b < size; ++b) {
      if (layout->degree[a] + layout->degree[b] > order) continue;
      std::vector<int> sum(nvars);
      for (int i = 0; i < nvars; ++i) {
        sum[i] = layout->exponents[a][i] + layout->exponents[b][i];
      }
      layout->product_terms.push_back({a, b, layout->lookup.at(sum)});
    }
  }
  layout->shift.assign(nvars, std::vector<int>(size, -1));
  for (int i = 0; i < nvars; ++i) {
    for (int k = 0; k < size; ++k) {
      if (layout->degree[k] >= order) continue;
      auto e = layout->exponents[k];
      ++e[i];
      layout->shift[i][k] = layout->lookup.at(e);
    }
  }
  return layout;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Common order for a binary operation: constants adapt, otherwise the
// lower order wins (the product of truncations is the truncated product).
std::shared_ptr<const JetLayout> common_layout(const JetLayout* a,
                                               const JetLayout* b) {
  if (a == nullptr && b == nullptr) return nullptr;
  if (a == nullptr) return JetLayout::get(b->nvars, b->order);
  if (b == nullptr) return JetLayout::get(a->nvars, a->order);
  if (a->nvars != b->nvars) {
    throw std::invalid_argument("Jet: mixing jets over different variable sets");
  }
  return JetLayout::get(a->nvars, std::min(a->order, b->order));
}

}  // namespace

int JetLayout::index_of(std::span<const int> exps) const {
  auto it = lookup.find(std::vector<int>(exps.begin(), exps.end()));
  return it == lookup.end() ? -1 : it->second;
}

std::shared_ptr<const JetLayout> JetLayout::get(int nvars, int order) {
  if (nvars < 1 || order < 0) {
    throw std::invalid_argument("JetLayout: need nvars >= 1 and order >= 0");
  }
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> tables;
  std::lock_guard lock(mutex);
  auto& slot = tables[{nvars, order}];
  if (!slot) slot = build_layout(nvars, order);
  return slot;
}

Jet Jet::constant(int nvars, int order, double value) {
  Jet j;
  j.layout_ = JetLayout::get(nvars, order);
  j.c_.assign(j.layout_->size(), 0.0);
  j.c_[0] = value;
  return j;
}

Jet Jet::variable(int nvars, int order, int index, double value) {
  Jet j = constant(nvars, order, value);
  if (order >= 1) j.c_[1 + index] = 1.0;
  return j;
}

double Jet::grad(int i) const {
  if (!layout_ || layout_->order < 1) return 0.0;
  return c_[1 + i];
}

double Jet::hess(int i, int j) const {
  if (!layout_ || layout_->order < 2) return 0.0;
  std::vector<int> e(layout_->nvars, 0);
  ++e[i];
  ++e[j];
  const double c = c_[layout_->index_of(e)];
  return i == j ? 2.0 * c : c;
}

double Jet::coefficient(std::span<const int> exps) const {
  if (!layout_) {
    for (int e : exps) {
      if (e != 0) return 0.0;
    }
    return c_[0];
  }
  const int k = layout_->index_of(exps);
  return k < 0 ? 0.0 : c_[k];
}

double Jet::partial(std::span<const int> exps) const {
  double f = 1.0;
  for (int e : exps) f *= factorial(e);
  return coefficient(exps) * f;
}

Jet Jet::derivative(int i) const {
  if (!layout_) return Jet(0.0);
  if (layout_->order < 1) {
    throw std::logic_error("Jet::derivative: order-0 jet carries no derivative");
  }
  Jet out;
  out.layout_ = JetLayout::get(layout_->nvars, layout_->order - 1);
  out.c_.assign(out.layout_->size(), 0.0);
  const auto& shift = layout_->shift[i];
  for (std::size_t k = 0; k < out.layout_->size(); ++k) {
    const int up = shift[k];
    out.c_[k] = c_[up] * (layout_->exponents[up][i]);
  }
  return out;
}

Jet Jet::truncated(int order) const {
  if (!layout_ || order >= layout_->order) return *this;
  Jet out;
  out.layout_ = JetLayout::get(layout_->nvars, order);
  out.c_.assign(c_.begin(), c_.begin() + out.layout_->size());
  return out;
}

Jet Jet::embedded(int nvars, std::span<const int> var_map) const {
  if (!layout_) return *this;
  Jet out = constant(nvars, layout_->order, 0.0);
  std::vector<int> e(nvars);
  for (std::size_t k = 0; k < layout_->size(); ++k) {
    if (c_[k] == 0.0) continue;
    std::fill(e.begin(), e.end(), 0);
    for (int i = 0; i < layout_->nvars; ++i) {
      e[var_map[i]] += layout_->exponents[k][i];
    }
    out.c_[out.layout_->index_of(e)] += c_[k];
  }
  return out;
}

void Jet::adopt(const Jet& other) {
  auto layout = common_layout(layout_.get(), other.layout());
  if (layout.get() == layout_.get()) return;
  if (!layout_) {
    const double v = c_[0];
    layout_ = std::move(layout);
    c_.assign(layout_->size(), 0.0);
    c_[0] = v;
  } else {
    layout_ = std::move(layout);
    c_.resize(layout_->size());
  }
}

Jet& Jet::operator+=(const Jet& o) {
  adopt(o);
  if (!o.layout_) {
    c_[0] += o.c_[0];
  } else {
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  }
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  adopt(o);
  if (!o.layout_) {
    c_[0] -= o.c_[0];
  } else {
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  }
  return *this;
}

Jet Jet::operator-() const {
  Jet out = *this;
  for (auto& c : out.c_) c = -c;
  return out;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (!a.layout_) {
    Jet out = b;
    for (auto& c : out.c_) c *= a.c_[0];
    return out;
  }
  if (!b.layout_) {
    Jet out = a;
    for (auto& c : out.c_) c *= b.c_[0];
    return out;
  }
  Jet out;
  out.layout_ = common_layout(a.layout(), b.layout());
  out.c_.assign(out.layout_->size(), 0.0);
  for (const auto& t : out.layout_->product_terms) {
    out.c_[t.target] += a.c_[t.a] * b.c_[t.b];
  }
  return out;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }

Jet operator/(const Jet& a, const Jet& b) {
  if (!b.layout_) return a * Jet(1.0 / b.c_[0]);
  return a * pow(b, -1.0);
}

Jet& Jet::operator/=(const Jet& o) { return *this = *this / o; }

Jet Jet::compose(std::span<const double> taylor) const {
  if (!layout_) return Jet(taylor[0]);
  const int order = layout_->order;
  Jet h = *this;
  h.c_[0] = 0.0;
  Jet out = constant(layout_->nvars, order, taylor[order]);
  for (int k = order - 1; k >= 0; --k) {
    out = out * h;
    out.c_[0] += taylor[k];
  }
  return out;
}

namespace {
std::vector<double> coeffs(const Jet& a) {
  return std::vector<double>(static_cast<std::size_t>(a.order()) + 1, 0.0);
}
}  // namespace

Jet exp(const Jet& a) {
  auto t = coeffs(a);
  const double e = std::exp(a.value());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = e / factorial(static_cast<int>(k));
  return a.compose(t);
}

Jet log(const Jet& a) {
  auto t = coeffs(a);
  const double v = a.value();
  t[0] = std::log(v);
  for (std::size_t k = 1; k < t.size(); ++k) {
    t[k] = ((k % 2 == 1) ? 1.0 : -1.0) / (static_cast<double>(k) * std::pow(v, k));
  }
  return a.compose(t);
}

Jet pow(const Jet& a, double p) {
  auto t = coeffs(a);
  const double v = a.value();
  double binom = 1.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    t[k] = binom * std::pow(v, p - static_cast<double>(k));
    binom *= (p - static_cast<double>(k)) / static_cast<double>(k + 1);
  }
  return a.compose(t);
}

Jet sqrt(const Jet& a) { return pow(a, 0.5); }

Jet square(const Jet& a) { return a * a; }

Jet sin(const Jet& a) {
  auto t = coeffs(a);
  for (std::size_t k = 0; k < t.size(); ++k) {
    t[k] = std::sin(a.value() + 0.5 * std::numbers::pi * static_cast<double>(k)) /
           factorial(static_cast<int>(k));
  }
  return a.compose(t);
}

Jet cos(const Jet& a) {
  auto t = coeffs(a);
  for (std::size_t k = 0; k < t.size(); ++k) {
    t[k] = std::cos(a.value() + 0.5 * std::numbers::pi * static_cast<double>(k)) /
           factorial(static_cast<int>(k));
  }
  return a.compose(t);
}

Jet tan(const Jet& a) { return sin(a) / cos(a); }

Jet tanh(const Jet& a) { return 1.0 - 2.0 / (exp(2.0 * a) + 1.0); }

Jet atan(const Jet& a) {
  // Univariate series of 1/(1+x^2) about v, integrated term by term.
  const int order = a.order();
  const double v = a.value();
  std::vector<double> q(order + 1, 0.0);
  // (1 + v^2 + 2 v h + h^2) q(h) = 1
  const double d0 = 1.0 + v * v;
  const double d1 = 2.0 * v;
  for (int k = 0; k <= order; ++k) {
    double s = (k == 0) ? 1.0 : 0.0;
    if (k >= 1) s -= d1 * q[k - 1];
    if (k >= 2) s -= q[k - 2];
    q[k] = s / d0;
  }
  std::vector<double> t(order + 1, 0.0);
  t[0] = std::atan(v);
  for (int k = 1; k <= order; ++k) t[k] = q[k - 1] / k;
  return a.compose(t);
}

std::vector<Jet> seed(std::span<const double> point, int order) {
  const int n = static_cast<int>(point.size());
  std::vector<Jet> out;
  out.reserve(point.size());
  for (int i = 0; i < n; ++i) out.push_back(Jet::variable(n, order, i, point[i]));
  return out;
}

}  // namespace ustar
