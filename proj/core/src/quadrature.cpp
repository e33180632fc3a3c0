#include "epidiff/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace epidiff {

namespace {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule
// (nodes on [0,1] side; symmetric).
constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel evaluate_panel(const std::function<double(double)>& fn, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double kron = 0.0, gauss = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double off = h * kKronrodNodes[i];
    double fsum;
    if (i == 7) {
      fsum = fn(c);
    } else {
      fsum = fn(c - off) + fn(c + off);
    }
    if (!std::isfinite(fsum))
      throw QuadratureError("integrand returned a non-finite value", a, b);
    kron += kKronrodWeights[i] * fsum;
    // Odd Kronrod indices (and the center) carry the embedded Gauss-7 rule.
    if (i % 2 == 1 || i == 7) gauss += kGaussWeights[i / 2] * fsum;
  }
  const double value = h * kron;
  const double diff = std::abs(h * (kron - gauss));
  const double error = diff;
  return {a, b, value, error};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& fn, double a, double b,
                           double abs_tol, double rel_tol, int max_subdivisions) {
  if (a == b) return {0.0, 0.0, 0};
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::priority_queue<Panel> heap;
  heap.push(evaluate_panel(fn, a, b));
  double total = heap.top().value, total_err = heap.top().error;
  int splits = 0;
  while (total_err > abs_tol + rel_tol * std::abs(total)) {
    if (splits >= max_subdivisions) {
      const Panel worst = heap.top();
      throw QuadratureError("quadrature failed to converge", worst.a, worst.b);
    }
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval at roundoff limit: accept its contribution as-is.
      total_err -= worst.error;
      if (heap.empty()) break;
      continue;
    }
    Panel left = evaluate_panel(fn, worst.a, mid);
    Panel right = evaluate_panel(fn, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++splits;
  }
  return {sign * total, total_err, splits};
}

double integrate_value(const std::function<double(double)>& fn, double a, double b,
                       double abs_tol, double rel_tol) {
  return integrate(fn, a, b, abs_tol, rel_tol).value;
}

WeightTable::WeightTable(std::function<double(double)> fn, double x_lo, double x_hi,
                         int n_segments, double seg_tol)
    : fn_(std::move(fn)), x_lo_(x_lo), x_hi_(x_hi), seg_tol_(seg_tol) {
  if (!(x_hi_ > x_lo_)) throw std::invalid_argument("WeightTable: empty range");
  if (n_segments < 8) throw std::invalid_argument("WeightTable: too few segments");

  // Graded grid: log-spaced from the anchor up to min(0.01 span, ...) when the
  // anchor is tiny (boundary-layer integrands), uniform beyond.
  grid_.push_back(x_lo_);
  const double knee = x_lo_ + 0.01 * (x_hi_ - x_lo_);
  if (x_lo_ > 0.0 && x_lo_ < 1e-4 * x_hi_) {
    const int n_log = n_segments / 3;
    const double lr = std::log(knee / x_lo_);
    for (int i = 1; i <= n_log; ++i)
      grid_.push_back(x_lo_ * std::exp(lr * static_cast<double>(i) / n_log));
    const int n_lin = n_segments - n_log;
    for (int i = 1; i <= n_lin; ++i)
      grid_.push_back(knee + (x_hi_ - knee) * static_cast<double>(i) / n_lin);
  } else {
    for (int i = 1; i <= n_segments; ++i)
      grid_.push_back(x_lo_ + (x_hi_ - x_lo_) * static_cast<double>(i) / n_segments);
  }
  grid_.back() = x_hi_;

  std::vector<double> segs(grid_.size() - 1);
  for (std::size_t i = 1; i < grid_.size(); ++i)
    segs[i - 1] = integrate(fn_, grid_[i - 1], grid_[i], seg_tol_, seg_tol_, 2000).value;
  cum_.assign(grid_.size(), 0.0);
  for (std::size_t i = 1; i < grid_.size(); ++i) cum_[i] = cum_[i - 1] + segs[i - 1];
  tail_.assign(grid_.size(), 0.0);
  for (std::size_t i = grid_.size() - 1; i-- > 0;) tail_[i] = tail_[i + 1] + segs[i];
}

double WeightTable::cumulative_to(double x) const {
  if (x <= x_lo_) {
    if (x < x_lo_ * (1.0 - 1e-12) - 1e-300)
      throw std::domain_error("WeightTable: query below anchor");
    return 0.0;
  }
  if (x >= x_hi_) {
    if (x > x_hi_ + 1e-12 * std::abs(x_hi_) + 1e-300)
      throw std::domain_error("WeightTable: query above range");
    return cum_.back();
  }
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - grid_.begin());
  const std::size_t lo = hi - 1;
  const double partial =
      integrate(fn_, grid_[lo], x, seg_tol_, seg_tol_, 2000).value;
  return cum_[lo] + partial;
}

double WeightTable::tail_to(double x) const {
  if (x >= x_hi_) {
    if (x > x_hi_ + 1e-12 * std::abs(x_hi_) + 1e-300)
      throw std::domain_error("WeightTable: query above range");
    return 0.0;
  }
  if (x <= x_lo_) {
    if (x < x_lo_ * (1.0 - 1e-12) - 1e-300)
      throw std::domain_error("WeightTable: query below anchor");
    return tail_.front();
  }
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - grid_.begin());
  const double partial = integrate(fn_, x, grid_[hi], seg_tol_, seg_tol_, 2000).value;
  return partial + tail_[hi];
}

}  // namespace epidiff
