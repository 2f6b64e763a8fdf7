#pragma once

// Parallel transport around closed coordinate loops (classical RK4 with
// step-halving error estimates) and holonomy membership surveys against the
// U*(2m) model of the groups module.

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "ustar/report.hpp"
#include "ustar/structures.hpp"

namespace ustar {

/// One parametrised piece of a loop, s in [0, 1].
struct LoopSegment {
  std::function<Point(double)> position;
  std::function<Point(double)> velocity;
};

struct LoopSpec {
  Point basepoint;
  std::vector<LoopSegment> segments;
  int steps_per_segment = 8;
  std::string label;

  /// Straight segments through the given vertices, returning to the first.
  static LoopSpec polygon(std::vector<Point> vertices, int steps = 8);
  /// Coordinate rectangle: base -> base + a e_i -> base + a e_i + b e_j -> base + b e_j.
  static LoopSpec rectangle(const Point& base, int i, int j, double a, double b, int steps = 8);

  LoopSpec reversed() const;
  /// This loop followed by `next` (both based at the same point).
  LoopSpec then(const LoopSpec& next) const;
  /// Throws InvalidInput unless each segment starts where the previous one ends
  /// and the last returns to the basepoint, all to 1e-12.
  void require_closed() const;
};

struct HolonomyElement {
  Eigen::MatrixXd matrix;  // H(i, j): transport of d_j expressed in d_i
  std::string loop;
  double error = 0.0;      // |H_N - H_2N| / 15
  int steps_per_segment = 0;
};

inline constexpr double kTransportTol = 1e-8;

/// RK4 on dH/ds = -Gamma(x') H with a fixed number of steps per segment.
Eigen::MatrixXd transport_fixed(const ConnectionField& conn, const LoopSpec& loop,
                                int steps_per_segment);

/// Doubles the step count from loop.steps_per_segment until the step-halving
/// estimate is within tol; throws ToleranceNotMet after max_doublings.
HolonomyElement parallel_transport(const ConnectionField& conn, const LoopSpec& loop,
                                   double tol = kTransportTol, int max_doublings = 8);

/// Real basis (e_1, I e_1, ..., e_2m, I e_2m) with e_{m+a} = J e_a, orthonormal
/// for g; columns of the returned matrix. In it I is the standard structure
/// and J the antilinear map (z, w) -> (-conj(w), conj(z)).
Eigen::MatrixXd adapted_frame(const TensorD& g, const TensorD& I, const TensorD& J);

/// Complex 2m x 2m matrix of an I-linear real map in an adapted frame.
Eigen::MatrixXcd complex_matrix(const Eigen::MatrixXd& H, const Eigen::MatrixXd& frame);

struct MembershipDefect {
  double u_star = 0.0;      // u_star_test defect
  double commutator = 0.0;  // |[H, I]|
  double theta = 0.0;
  double defect() const { return std::max(u_star, commutator); }
};
MembershipDefect membership_defect(const Eigen::MatrixXd& H, const TensorD& g, const TensorD& I,
                                   const TensorD& J);

/// A unit structure anticommuting with I, taken from the triple at x.
TensorD anticommuting_structure(const TensorD& I, const std::array<TensorD, 3>& triple);

struct SurveyOptions {
  double min_side = 0.05;
  double max_side = 0.2;
  double membership_tol = 1e-4;
  double transport_tol = kTransportTol;
  int steps = 4;
};

/// Random coordinate rectangles at the basepoint; loop k draws from a
/// generator seeded with seed + k so results do not depend on scheduling.
Report holonomy_survey(const ConnectionField& conn, const MetricField& g,
                       const AlmostComplexField& I, const QuaternionicTriple& triple,
                       const Point& basepoint, int n_loops, std::uint64_t seed,
                       SurveyOptions opt = {});

/// The loop drawn for index k of a survey.
LoopSpec survey_loop(const Point& basepoint, std::uint64_t seed, int k, const SurveyOptions& opt);

}  // namespace ustar
