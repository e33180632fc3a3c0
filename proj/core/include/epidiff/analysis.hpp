#pragma once

#include <string>
#include <vector>

#include "epidiff/functionals.hpp"
#include "epidiff/grid.hpp"
#include "epidiff/model.hpp"

namespace epidiff {

enum class RateBound { hardy_rate, poincare_rate, none };

struct DecayReport {
  std::vector<double> times;
  std::vector<double> values;    // the weighted functional per snapshot
  double rate = 0.0;             // fitted decay rate of the functional
  double r_squared = 0.0;        // quality of the log-linear fit
  double bound = 0.0;            // analytic lower bound on the rate (if any)
  std::string bound_kind;        // "1/(4NA)", "1/(N C_P)", or ""
  bool rate_meets_bound = false;
};

/// Least-squares fit of ln(functional) against t over the snapshots whose
/// times lie in [t_lo, t_hi] (at least 5 required).  The functional is
/// weighted_norm(snapshot, kind).  Non-positive or vanishing values in the
/// window raise std::domain_error mentioning "zero norm".  The fitted rate is
/// invariant under rescaling the initial data.
DecayReport fit_decay_rate(const Trajectory& traj, WeightKind kind, const ModelParams& p,
                           double t_lo, double t_hi, RateBound bound = RateBound::hardy_rate);

struct OriginScalingEntry {
  double t = 0.0;
  double u0_extrapolated = 0.0;  // boundary value by linear extrapolation
  double window_slope = 0.0;     // d ln(int_0^y u^2) / d ln y, least squares
};

struct OriginScalingReport {
  std::vector<OriginScalingEntry> entries;
  double max_u0_squared = 0.0;
  double min_slope = 0.0;
  bool pass = false;  // all slopes > 1 (mass of u^2 vanishes toward the origin)
};

/// Audits the origin behaviour of a general-form trajectory: extrapolated
/// boundary values and the scaling exponent of y -> int_0^y u(x,t)^2 dx over
/// the probe values (defaults 0.02..0.5).
OriginScalingReport origin_scaling_audit(const Trajectory& traj,
                                         const std::vector<double>& y_values = {});

struct WeakResidualReport {
  std::vector<double> per_test;  // one residual per test function
  double max_residual = 0.0;
};

/// Weak-form defect of a p-form trajectory against test functions
/// sin(m pi x), m = 1..m_max: centered time differences of the snapshots
/// versus the flux form evaluated at the intermediate snapshot, normalized by
/// the H1-seminorm of each test function and the window length.  Requires
/// uniformly spaced snapshots (at least 3).
WeakResidualReport weak_residual(const Trajectory& traj, const ModelParams& p, int m_max = 8);

struct ConcentrationEntry {
  double t = 0.0;
  double mass = 0.0;
  double first_abs_moment = 0.0;   // int |x| u dx
  double mass_fraction = 0.0;      // share of mass inside |x| <= half_width
};

/// Mass, first absolute moment, and near-origin mass fraction per snapshot.
std::vector<ConcentrationEntry> concentration_metrics(const Trajectory& traj,
                                                      double half_width = 0.05);

/// Least-squares exponent of ln u against ln x over the window
/// [window_lo, window_hi] (defaults 2 dx and 20 dx).  Values must be positive
/// in the window.
double local_exponent(const Field& u, double window_lo = -1.0, double window_hi = -1.0);

struct PointwiseBoundEntry {
  double t = 0.0;
  double max_ratio = 0.0;  // max over cells of p / envelope
};

struct PointwiseBoundReport {
  std::vector<PointwiseBoundEntry> entries;
  double max_ratio = 0.0;
  double slack = 0.02;
  bool pass = false;
};

/// Checks the pointwise envelope for densities evolved from z-form data:
///   p(x, t) <= (F/f)(x) sqrt(IF(x)) e^{-t/(2 N C_P)} sqrt(int F (z0')^2),
/// where IF(x) = int_0^x dy/F.  The trajectory must be a z-form run; the
/// envelope uses the plain Poincare constant and allows 2% slack.
PointwiseBoundReport pointwise_bound_audit(const Trajectory& traj, const ModelParams& p);

}  // namespace epidiff
