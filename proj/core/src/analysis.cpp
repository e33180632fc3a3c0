#include "epidiff/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace epidiff {

namespace {

struct LineFit {
  double slope = 0.0, intercept = 0.0, r_squared = 1.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw std::invalid_argument("least_squares: need at least 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-300) throw std::invalid_argument("least_squares: degenerate x");
  LineFit fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += e * e;
  }
  fit.r_squared = (ss_tot > 1e-300) ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace

DecayReport fit_decay_rate(const Trajectory& traj, WeightKind kind, const ModelParams& p,
                           double t_lo, double t_hi, RateBound bound) {
  DecayReport rep;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    if (t < t_lo - 1e-12 || t > t_hi + 1e-12) continue;
    rep.times.push_back(t);
    rep.values.push_back(weighted_norm(traj.snapshot_field(static_cast<int>(k)), kind, p));
  }
  if (rep.times.size() < 5)
    throw std::invalid_argument("fit_decay_rate: need at least 5 snapshots in the window");
  std::vector<double> logs(rep.values.size());
  for (std::size_t i = 0; i < rep.values.size(); ++i) {
    if (!(rep.values[i] > 0.0) || rep.values[i] < 1e-290)
      throw std::domain_error("fit_decay_rate: zero norm in the fit window");
    logs[i] = std::log(rep.values[i]);
  }
  const LineFit fit = least_squares(rep.times, logs);
  rep.rate = -fit.slope;
  rep.r_squared = fit.r_squared;
  if (bound == RateBound::hardy_rate) {
    rep.bound = 1.0 / (4.0 * p.n * hardy_constant_A(p));
    rep.bound_kind = "1/(4NA)";
  } else if (bound == RateBound::poincare_rate) {
    rep.bound = 1.0 / (p.n * poincare_constant(p));
    rep.bound_kind = "1/(N C_P)";
  }
  rep.rate_meets_bound = rep.rate >= rep.bound * 0.98;
  return rep;
}

OriginScalingReport origin_scaling_audit(const Trajectory& traj,
                                         const std::vector<double>& y_values_in) {
  std::vector<double> ys = y_values_in;
  if (ys.empty()) {
    for (int i = 0; i < 25; ++i) ys.push_back(0.02 + (0.5 - 0.02) * i / 24.0);
  }
  const Grid& g = *traj.grid;
  OriginScalingReport rep;
  rep.min_slope = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const std::vector<double>& v = traj.snapshots[k];
    OriginScalingEntry e;
    e.t = traj.times[k];
    e.u0_extrapolated = 0.5 * (3.0 * v[0] - v[1]);
    rep.max_u0_squared =
        std::max(rep.max_u0_squared, e.u0_extrapolated * e.u0_extrapolated);
    // Cumulative int_0^y u^2 on the midpoint rule, then the log-log slope.
    std::vector<double> lx, ly;
    for (double y : ys) {
      double acc = 0.0;
      for (int i = 0; i < g.n_cells && g.centers[i] <= y; ++i) acc += v[i] * v[i];
      acc *= g.dx;
      if (acc > 1e-300) {
        lx.push_back(std::log(y));
        ly.push_back(std::log(acc));
      }
    }
    if (lx.size() >= 3) {
      e.window_slope = least_squares(lx, ly).slope;
    } else {
      e.window_slope = std::numeric_limits<double>::infinity();  // no u^2 mass at all
    }
    rep.min_slope = std::min(rep.min_slope, e.window_slope);
    rep.entries.push_back(e);
  }
  rep.pass = rep.min_slope > 1.0;
  return rep;
}

WeakResidualReport weak_residual(const Trajectory& traj, const ModelParams& p, int m_max) {
  const Grid& g = *traj.grid;
  const int n = g.n_cells;
  const int n_snap = static_cast<int>(traj.times.size());
  if (n_snap < 3)
    throw std::invalid_argument("weak_residual: need at least 3 snapshots");
  const double dt = traj.times[1] - traj.times[0];
  for (int k = 1; k < n_snap; ++k) {
    if (std::abs((traj.times[k] - traj.times[k - 1]) - dt) > 1e-9 * std::max(dt, 1e-12))
      throw std::invalid_argument("weak_residual: snapshots must be uniformly spaced");
  }

  const double pi = std::acos(-1.0);
  const double inv2n = 1.0 / (2.0 * p.n);
  WeakResidualReport rep;
  for (int m = 1; m <= m_max; ++m) {
    std::vector<double> psi(n), dpsi(n);
    for (int i = 0; i < n; ++i) {
      psi[i] = std::sin(m * pi * g.centers[i]);
      dpsi[i] = m * pi * std::cos(m * pi * g.centers[i]);
    }
    const double dpsi_l2 = m * pi / std::sqrt(2.0);  // H1 seminorm of sin(m pi x)

    double acc = 0.0;
    int count = 0;
    for (int k = 1; k + 1 < n_snap; ++k) {
      const std::vector<double>& prev = traj.snapshots[k - 1];
      const std::vector<double>& cur = traj.snapshots[k];
      const std::vector<double>& next = traj.snapshots[k + 1];
      double defect = 0.0;
      // w = f p; flux = dw/(2N) - g p, tested against -psi' (integration by
      // parts with zero-flux ends).
      std::vector<double> w(n);
      for (int i = 0; i < n; ++i) w[i] = coeffs(g.centers[i], p).f * cur[i];
      for (int i = 0; i < n; ++i) {
        double dw;
        if (i == 0)
          dw = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * g.dx);
        else if (i == n - 1)
          dw = (3.0 * w[n - 1] - 4.0 * w[n - 2] + w[n - 3]) / (2.0 * g.dx);
        else
          dw = (w[i + 1] - w[i - 1]) / (2.0 * g.dx);
        const double flux = inv2n * dw - coeffs(g.centers[i], p).g * cur[i];
        const double pt = (next[i] - prev[i]) / (2.0 * dt);
        defect += (pt * psi[i] + flux * dpsi[i]) * g.dx;
      }
      acc += std::abs(defect);
      ++count;
    }
    rep.per_test.push_back(acc / count / dpsi_l2);
    rep.max_residual = std::max(rep.max_residual, rep.per_test.back());
  }
  return rep;
}

std::vector<ConcentrationEntry> concentration_metrics(const Trajectory& traj,
                                                      double half_width) {
  const Grid& g = *traj.grid;
  std::vector<ConcentrationEntry> out;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const std::vector<double>& v = traj.snapshots[k];
    ConcentrationEntry e;
    e.t = traj.times[k];
    double inside = 0.0, total = 0.0;
    for (int i = 0; i < g.n_cells; ++i) {
      total += v[i];
      e.first_abs_moment += std::abs(g.centers[i]) * v[i];
      if (std::abs(g.centers[i]) <= half_width) inside += v[i];
    }
    e.mass = total * g.dx;
    e.first_abs_moment *= g.dx;
    e.mass_fraction = (std::abs(total) > 1e-300) ? inside / total : 0.0;
    out.push_back(e);
  }
  return out;
}

double local_exponent(const Field& u, double window_lo, double window_hi) {
  const Grid& g = *u.grid;
  if (window_lo < 0.0) window_lo = 2.0 * g.dx;
  if (window_hi < 0.0) window_hi = 20.0 * g.dx;
  std::vector<double> lx, ly;
  for (int i = 0; i < g.n_cells; ++i) {
    const double x = g.centers[i];
    if (x < window_lo || x > window_hi) continue;
    if (!(u.values[i] > 0.0))
      throw std::domain_error("local_exponent: non-positive value in the window");
    lx.push_back(std::log(x));
    ly.push_back(std::log(u.values[i]));
  }
  if (lx.size() < 3)
    throw std::invalid_argument("local_exponent: window holds fewer than 3 cells");
  return least_squares(lx, ly).slope;
}

PointwiseBoundReport pointwise_bound_audit(const Trajectory& traj, const ModelParams& p) {
  const Grid& g = *traj.grid;
  PointwiseBoundReport rep;
  const double m0_sq = weighted_norm(traj.snapshot_field(0), WeightKind::big_f, p);
  if (m0_sq <= 0.0) {
    // Zero data: both sides of the envelope vanish identically.
    for (double t : traj.times) rep.entries.push_back({t, 0.0});
    rep.pass = true;
    return rep;
  }
  const double m0 = std::sqrt(m0_sq);
  const double cp = poincare_constant(p);
  auto weights = shared_weights(p);
  std::vector<double> sqrt_if(g.n_cells);
  for (int i = 0; i < g.n_cells; ++i)
    sqrt_if[i] = std::sqrt(weights->inv_f_cumulative(g.centers[i]));

  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    const double decay = std::exp(-t / (2.0 * p.n * cp));
    PointwiseBoundEntry e;
    e.t = t;
    for (int i = 0; i < g.n_cells; ++i) {
      // p / envelope with the common F/f factor cancelled: z / (sqrt(IF) e M0).
      const double ratio = traj.snapshots[k][i] / (sqrt_if[i] * decay * m0);
      e.max_ratio = std::max(e.max_ratio, ratio);
    }
    rep.max_ratio = std::max(rep.max_ratio, e.max_ratio);
    rep.entries.push_back(e);
  }
  rep.pass = rep.max_ratio <= 1.0 + rep.slack;
  return rep;
}

}  // namespace epidiff
