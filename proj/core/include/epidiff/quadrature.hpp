#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace epidiff {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
};

struct QuadratureError : std::runtime_error {
  double bad_lo, bad_hi;
  QuadratureError(const std::string& msg, double lo, double hi)
      : std::runtime_error(msg), bad_lo(lo), bad_hi(hi) {}
};

/// Adaptive Gauss-Kronrod (7-15 pair) integration of fn over [a, b].
/// Splits the worst subinterval until the summed error estimate drops below
/// abs_tol + rel_tol * |value|.  Throws QuadratureError naming the offending
/// subinterval when the budget of subdivisions is exhausted or the integrand
/// returns a non-finite value.
QuadratureResult integrate(const std::function<double(double)>& fn, double a, double b,
                           double abs_tol = 1e-12, double rel_tol = 1e-12,
                           int max_subdivisions = 4000);

/// Convenience wrapper returning just the value.
double integrate_value(const std::function<double(double)>& fn, double a, double b,
                       double abs_tol = 1e-12, double rel_tol = 1e-12);

/// Piecewise cumulative table of an integrand on [x_lo, x_hi]: the grid is
/// graded (log-spaced near x_lo, uniform beyond), each segment integral is
/// adaptive, and cumulative sums are taken relative to x_lo.  For integrands
/// singular at 0 the caller passes a small positive anchor as x_lo and works
/// with differences only; the table never evaluates below its anchor.
class WeightTable {
 public:
  WeightTable(std::function<double(double)> fn, double x_lo, double x_hi,
              int n_segments = 2048, double seg_tol = 1e-13);

  /// Integral of fn from the anchor x_lo to x (monotone in x).  For x between
  /// nodes an adaptive partial-segment integral is added, so lookups do not
  /// lose accuracy to interpolation.
  double cumulative_to(double x) const;

  /// Integral from x to x_hi, accumulated right-to-left at build time.  For
  /// integrands concentrated near the anchor this avoids the catastrophic
  /// cancellation a cumulative difference would suffer.
  double tail_to(double x) const;

  /// Integral over [a, b] with x_lo <= a <= b <= x_hi.
  double between(double a, double b) const { return cumulative_to(b) - cumulative_to(a); }

  double anchor() const { return x_lo_; }
  double upper() const { return x_hi_; }

 private:
  std::function<double(double)> fn_;
  double x_lo_, x_hi_;
  double seg_tol_;
  std::vector<double> grid_;
  std::vector<double> cum_;   // integral from x_lo to grid_[i]
  std::vector<double> tail_;  // integral from grid_[i] to x_hi
};

}  // namespace epidiff
