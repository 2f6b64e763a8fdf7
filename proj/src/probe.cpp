#include "ustar/probe.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "ustar/groups.hpp"

namespace ustar {

namespace {

double distance(const Point& a, const Point& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

LoopSegment straight(const Point& from, const Point& to) {
  Point dir(from.size());
  for (std::size_t k = 0; k < from.size(); ++k) dir[k] = to[k] - from[k];
  return {[from, dir](double s) {
            Point p = from;
            for (std::size_t k = 0; k < p.size(); ++k) p[k] += s * dir[k];
            return p;
          },
          [dir](double) { return dir; }};
}

}  // namespace

LoopSpec LoopSpec::polygon(std::vector<Point> vertices, int steps) {
  if (vertices.size() < 2) throw GeometryError(ErrorKind::InvalidInput, "polygon needs two vertices");
  LoopSpec loop;
  loop.basepoint = vertices.front();
  loop.steps_per_segment = steps;
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    loop.segments.push_back(straight(vertices[k], vertices[(k + 1) % vertices.size()]));
  }
  loop.label = "polygon(" + std::to_string(vertices.size()) + ")";
  return loop;
}

LoopSpec LoopSpec::rectangle(const Point& base, int i, int j, double a, double b, int steps) {
  Point p1 = base, p2 = base, p3 = base;
  p1[i] += a;
  p2[i] += a;
  p2[j] += b;
  p3[j] += b;
  LoopSpec loop = polygon({base, p1, p2, p3}, steps);
  char buf[128];
  std::snprintf(buf, sizeof buf, "rect(%d,%d,%.17g,%.17g)", i, j, a, b);
  loop.label = buf;
  return loop;
}

LoopSpec LoopSpec::reversed() const {
  LoopSpec out = *this;
  out.segments.clear();
  for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
    const LoopSegment seg = *it;
    out.segments.push_back({[seg](double s) { return seg.position(1.0 - s); },
                            [seg](double s) {
                              Point v = seg.velocity(1.0 - s);
                              for (auto& c : v) c = -c;
                              return v;
                            }});
  }
  out.label = "reverse(" + label + ")";
  return out;
}

LoopSpec LoopSpec::then(const LoopSpec& next) const {
  if (distance(basepoint, next.basepoint) > 1e-12) {
    throw GeometryError(ErrorKind::InvalidInput, "loops have different basepoints");
  }
  LoopSpec out = *this;
  out.segments.insert(out.segments.end(), next.segments.begin(), next.segments.end());
  out.label = label + "*" + next.label;
  return out;
}

void LoopSpec::require_closed() const {
  if (segments.empty()) throw GeometryError(ErrorKind::InvalidInput, "loop has no segments");
  Point at = basepoint;
  for (const auto& seg : segments) {
    if (distance(seg.position(0.0), at) > 1e-12) {
      throw GeometryError(ErrorKind::InvalidInput, "loop segments are not joined");
    }
    at = seg.position(1.0);
  }
  if (distance(at, basepoint) > 1e-12) {
    throw GeometryError(ErrorKind::InvalidInput, "loop does not return to its basepoint");
  }
}

Eigen::MatrixXd transport_fixed(const ConnectionField& conn, const LoopSpec& loop,
                                int steps_per_segment) {
  loop.require_closed();
  const int n = conn.dim();
  auto rhs = [&](const LoopSegment& seg, double s, const Eigen::MatrixXd& H) {
    const Point x = seg.position(s);
    const Point v = seg.velocity(s);
    const TensorD gam = values(conn.eval(x, 0));
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        double a = 0.0;
        for (int i = 0; i < n; ++i) a += gam(k, i, j) * v[i];
        A(k, j) = -a;
      }
    return Eigen::MatrixXd(A * H);
  };
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  const double h = 1.0 / steps_per_segment;
  for (const auto& seg : loop.segments) {
    for (int step = 0; step < steps_per_segment; ++step) {
      const double s = step * h;
      const Eigen::MatrixXd k1 = rhs(seg, s, H);
      const Eigen::MatrixXd k2 = rhs(seg, s + h / 2, H + h / 2 * k1);
      const Eigen::MatrixXd k3 = rhs(seg, s + h / 2, H + h / 2 * k2);
      const Eigen::MatrixXd k4 = rhs(seg, s + h, H + h * k3);
      H += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
  }
  return H;
}

HolonomyElement parallel_transport(const ConnectionField& conn, const LoopSpec& loop, double tol,
                                   int max_doublings) {
  int steps = std::max(1, loop.steps_per_segment);
  Eigen::MatrixXd coarse = transport_fixed(conn, loop, steps);
  double err = 0.0;
  for (int d = 0; d <= max_doublings; ++d) {
    const Eigen::MatrixXd fine = transport_fixed(conn, loop, 2 * steps);
    err = (fine - coarse).cwiseAbs().maxCoeff() / 15.0;
    if (err <= tol) return {fine, loop.label, err, 2 * steps};
    coarse = fine;
    steps *= 2;
  }
  throw GeometryError(ErrorKind::ToleranceNotMet,
                      "transport error estimate " + format_double(err) + " above tolerance");
}

Eigen::MatrixXd adapted_frame(const TensorD& g, const TensorD& I, const TensorD& J) {
  const int n = g.dim();
  if (n % 4 != 0) throw GeometryError(ErrorKind::InvalidInput, "adapted frame needs dim 4m");
  const int m = n / 4;
  Eigen::MatrixXd G(n, n), Im(n, n), Jm(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      G(i, j) = g(i, j);
      Im(i, j) = I(i, j);
      Jm(i, j) = J(i, j);
    }
  auto inner = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(G * b); };
  std::vector<Eigen::VectorXd> span;  // orthonormal so far
  Eigen::MatrixXd F(n, n);
  int a = 0;
  for (int cand = 0; cand < n && a < m; ++cand) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n, cand);
    for (const auto& s : span) v -= inner(s, v) * s;
    const double len = std::sqrt(std::max(inner(v, v), 0.0));
    if (len < 1e-6) continue;
    v /= len;
    const Eigen::VectorXd Iv = Im * v, Jv = Jm * v, IJv = Im * Jv;
    F.col(2 * a) = v;
    F.col(2 * a + 1) = Iv;
    F.col(2 * (m + a)) = Jv;
    F.col(2 * (m + a) + 1) = IJv;
    for (const Eigen::VectorXd& w : {v, Iv, Jv, IJv}) span.push_back(w);
    ++a;
  }
  if (a < m) throw GeometryError(ErrorKind::Singular, "could not complete an adapted frame");
  return F;
}

Eigen::MatrixXcd complex_matrix(const Eigen::MatrixXd& H, const Eigen::MatrixXd& frame) {
  const Eigen::MatrixXd Ha = frame.inverse() * H * frame;
  const int c = static_cast<int>(H.rows()) / 2;
  Eigen::MatrixXcd M(c, c);
  for (int k = 0; k < c; ++k)
    for (int l = 0; l < c; ++l) M(k, l) = {Ha(2 * k, 2 * l), Ha(2 * k + 1, 2 * l)};
  return M;
}

MembershipDefect membership_defect(const Eigen::MatrixXd& H, const TensorD& g, const TensorD& I,
                                   const TensorD& J) {
  const int n = g.dim();
  Eigen::MatrixXd Im(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Im(i, j) = I(i, j);
  MembershipDefect d;
  d.commutator = (H * Im - Im * H).cwiseAbs().maxCoeff();
  const UStarResult r = u_star_test(complex_matrix(H, adapted_frame(g, I, J)), 1e-12);
  d.u_star = r.defect();
  d.theta = r.best_theta;
  return d;
}

TensorD anticommuting_structure(const TensorD& I, const std::array<TensorD, 3>& triple) {
  const int n = I.dim();
  // <A, B> = -tr(AB) / n, so unit structures have norm 1
  auto inner = [n](const TensorD& A, const TensorD& B) {
    double t = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t -= A(i, j) * B(j, i);
    return t / n;
  };
  int best = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::abs(inner(triple[k], I)) < std::abs(inner(triple[best], I))) best = k;
  }
  TensorD J = triple[best];
  const double c = inner(J, I);
  for (std::size_t k = 0; k < J.size(); ++k) J.data()[k] -= c * I.data()[k];
  const double len = std::sqrt(inner(J, J));
  for (auto& v : J.data()) v /= len;
  return J;
}

LoopSpec survey_loop(const Point& basepoint, std::uint64_t seed, int k, const SurveyOptions& opt) {
  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(k));
  const int n = static_cast<int>(basepoint.size());
  std::uniform_int_distribution<int> axis(0, n - 1), coin(0, 1);
  std::uniform_real_distribution<double> side(opt.min_side, opt.max_side);
  const int i = axis(rng);
  int j = axis(rng);
  while (j == i) j = axis(rng);
  const double a = side(rng) * (coin(rng) ? 1.0 : -1.0);
  const double b = side(rng) * (coin(rng) ? 1.0 : -1.0);
  return LoopSpec::rectangle(basepoint, i, j, a, b, opt.steps);
}

namespace {

std::string frame_hash(const Eigen::MatrixXd& F) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Eigen::Index k = 0; k < F.size(); ++k) {
    for (char c : format_double(F.data()[k])) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

Report holonomy_survey(const ConnectionField& conn, const MetricField& g,
                       const AlmostComplexField& I, const QuaternionicTriple& triple,
                       const Point& basepoint, int n_loops, std::uint64_t seed,
                       SurveyOptions opt) {
  if (n_loops < 0) throw GeometryError(ErrorKind::InvalidInput, "negative loop count");
  const TensorD G = g.value(basepoint);
  const TensorD I0 = I.value(basepoint);
  const TensorD J0 = anticommuting_structure(I0, triple.value(basepoint));
  const Eigen::MatrixXd F = adapted_frame(G, I0, J0);

  Report rep;
  rep.kind = "holonomy_survey";
  Check member;
  member.name = "u_star_membership";
  member.tolerance = opt.membership_tol;
  Check transport;
  transport.name = "transport_error";
  transport.tolerance = opt.transport_tol;
  Table table{"loops", {"index", "i", "j", "a", "b", "defect", "commutator", "theta", "error"}, {}};
  int passed = 0;
  for (int k = 0; k < n_loops; ++k) {
    const LoopSpec loop = survey_loop(basepoint, seed, k, opt);
    const HolonomyElement h = parallel_transport(conn, loop, opt.transport_tol);
    const MembershipDefect d = membership_defect(h.matrix, G, I0, J0);
    member.observe(d.defect(), {static_cast<double>(k)});
    transport.observe(h.error, {static_cast<double>(k)});
    if (d.defect() <= opt.membership_tol) ++passed;
    // recover the rectangle from its vertices
    const Point p1 = loop.segments[0].position(1.0), p3 = loop.segments[3].position(0.0);
    int ia = 0, jb = 0;
    for (int c = 0; c < static_cast<int>(basepoint.size()); ++c) {
      if (p1[c] != basepoint[c]) ia = c;
      if (p3[c] != basepoint[c]) jb = c;
    }
    table.rows.push_back({static_cast<double>(k), static_cast<double>(ia), static_cast<double>(jb),
                          p1[ia] - basepoint[ia], p3[jb] - basepoint[jb], d.defect(), d.commutator,
                          d.theta, h.error});
  }
  member.finish();
  transport.finish();
  rep.checks = {member, transport};
  rep.tables.push_back(std::move(table));
  rep.set("n_loops", static_cast<long long>(n_loops));
  rep.set("pass_fraction", n_loops ? static_cast<double>(passed) / n_loops : 1.0);
  rep.set("max_defect", member.max_residual);
  rep.set("frame_hash", frame_hash(F));
  rep.set("seed", static_cast<long long>(seed));
  return rep;
}

}  // namespace ustar
