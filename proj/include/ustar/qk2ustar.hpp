#pragma once

// From a quaternionic Kaehler manifold with a Killing field to a torsion-free
// connection with holonomy in U*(2m).
//
// In dimension four the moment section of a Killing field X is a constant
// multiple k of the self-dual part of dX-flat.  Writing it as mu1 times a
// unit quaternionic 2-form w-hat (w-hat(X, Y) = g(I X, Y), I^2 = -1) picks
// out the complex structure I, and the 1-form alpha = -d log(mu1) / 2
// modifies the Levi-Civita connection into one preserving I.

#include <array>

#include "ustar/report.hpp"
#include "ustar/structures.hpp"

namespace ustar {

inline constexpr double kZeroMomentTol = 1e-10;

class MomentSection4d {
 public:
  MomentSection4d(MetricField g, VectorField X, double calibration = 1.0);

  const MetricField& metric() const { return g_; }
  const VectorField& killing_field() const { return X_; }
  double calibration() const { return k_; }

  /// Self-dual part of dX-flat, uncalibrated.
  TensorJ self_dual_dx(const Point& x, int order) const;
  /// k (dX-flat)^+.
  TensorJ section(const Point& x, int order) const;
  /// Length in units where quaternionic forms have unit length,
  /// mu1 = sqrt(<mu, mu> / 2); throws ZeroMoment at or below kZeroMomentTol.
  Jet mu1(const Point& x, int order) const;
  /// Unit quaternionic form section / mu1.
  TensorJ direction(const Point& x, int order) const;
  /// Components (mu_1, mu_2, mu_3) in the coframe self-dual basis.
  std::array<Jet, 3> components(const Point& x, int order) const;

  AlmostComplexField complex_structure() const;
  ScalarField mu1_field() const;
  FormField section_field() const;

 private:
  MetricField g_;
  VectorField X_;
  double k_ = 1.0;
};

struct Calibration {
  double k = 0.0;
  double residual = 0.0;  // max |k d|mu_raw| - i_X w-hat_raw| / scale
};

/// Least-squares fit of k in d(k mu1_raw) = i_X w-hat over the samples; the
/// sign of k selects the orientation of w-hat.
Calibration calibrate_moment(const MetricField& g, const VectorField& X,
                             std::span<const Point> samples);

/// Checks that X is Killing (NotKilling above 1e-6), fits the calibration
/// (rejecting residuals above 1e-5) and returns the section.
MomentSection4d moment_section_4d(const MetricField& g, const VectorField& X,
                                  std::span<const Point> samples);

struct MomentEquationResiduals {
  double dmu1 = 0.0;       // |d mu1 - i_X w1|
  double theta2 = 0.0;     // |mu1 theta2 - i_X w3|
  double theta3 = 0.0;     // |mu1 theta3 + i_X w2|
  double covariant = 0.0;  // |nabla mu - sum_i i_X w_i (x) w_i|
};
/// Residuals in a frame rotated so that w1 = w-hat; the connection forms are
/// defined by nabla w1 = theta2 (x) w3 - theta3 (x) w2.
MomentEquationResiduals moment_equation_residuals(const MomentSection4d& ms, const Point& x);

/// alpha = -d log(mu1) / 2 to the given order.
TensorJ alpha_from_moment(const MomentSection4d& ms, const Point& x, int order);
/// The algebraic form alpha(Y) = -mu(X, Y) / (2 mu1^2).
TensorD alpha_algebraic(const MomentSection4d& ms, const Point& x);

/// S^k_ij with nabla-tilde = nabla + S: for Z = d_i, Y = d_j,
/// S(Z, Y) = a(Z) Y + a(Y) Z - sum_l [a(I_l Y) I_l Z + a(I_l Z) I_l Y].
template <typename T>
Tensor<T> modification_tensor(const Tensor<T>& alpha, const std::array<Tensor<T>, 3>& ijk);

/// max_i |sum_j S^j_ij - (4m + 4) alpha_i| with n = 4m.
double modification_trace_residual(const TensorD& S, const TensorD& alpha);

using OneFormEvaluator = std::function<TensorJ(const Point&, int order)>;

ConnectionField modified_connection(const ConnectionField& base, OneFormEvaluator alpha,
                                    const QuaternionicTriple& triple);

/// Rotate a triple by a constant SO(3) matrix: I'_a = sum_b R(a, b) I_b.
QuaternionicTriple rotated_triple(const QuaternionicTriple& t, const std::array<double, 9>& R);

struct UStarConstruction {
  MetricField g;
  MomentSection4d moment;
  ConnectionField connection;  // nabla-tilde
  AlmostComplexField I;
  ScalarField mu1;
  int m = 1;
};

/// Full construction from a four-dimensional entry with a Killing field.
UStarConstruction qk_to_ustar(const MetricField& g, const VectorField& X,
                              std::span<const Point> calibration_samples);

/// mu1^-2 g.
MetricField rescaled_metric(const MetricField& g, const ScalarField& mu1);

struct VerifyOptions {
  double tol = 1e-6;
};

/// Residuals of (a) nabla-tilde I, (b) torsion, (c) nabla-tilde of the
/// volume form mu1^-(2m+2) vol_g, plus the trace constant; points on the
/// zero set of the moment section are skipped and counted.
Report verify_ustar(const UStarConstruction& c, std::span<const Point> points,
                    VerifyOptions opt = {});

// Individual residuals at one point.
double parallel_residual(const ConnectionField& conn, const AlmostComplexField& I, const Point& x);
double volume_residual(const ConnectionField& conn, const ScalarField& mu1, const MetricField& g,
                       int m, const Point& x);

}  // namespace ustar
