#include "epidiff/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace epidiff {

namespace {

constexpr double kOmegaAnchor = 1e-12;    // lower cut for 1/omega integrals
constexpr double kPsiLimitCut = 1e-10;    // below this, psi uses its limit value
constexpr double kPoincareSplit = 1e-4;   // split point of the plain Poincare integral
constexpr double kPhiOuterCut = 1e-6;     // lower cut of the phi-weighted outer integral

}  // namespace

Weights::Weights(const ModelParams& p, int n_segments)
    : p_(p),
      inv_f_([p](double x) { return std::exp(-log_big_f(x, p)); }, 0.0, 1.0, n_segments),
      inv_omega_([p](double x) { return 1.0 / omega(x, p); }, kOmegaAnchor, 1.0,
                 n_segments),
      phi_density_(
          [this](double y) {
            // omega^{-1} IF^2 in log space: IF^2 alone can overflow for large
            // N even though the product is finite.
            const double g = inv_f_.cumulative_to(y);
            if (g <= 0.0) return 0.0;
            return std::exp(2.0 * std::log(g) + log_big_f(y, p_) -
                            std::log(coeffs(y, p_).f));
          },
          0.0, 1.0, n_segments) {}

double Weights::inv_f_cumulative(double x) const { return inv_f_.cumulative_to(x); }

double Weights::inv_omega_between(double a, double b) const {
  if (!(a > 0.0)) throw std::domain_error("inv_omega_between: lower limit must be positive");
  const double lo = std::max(a, kOmegaAnchor);
  // When the upper limit is the right endpoint, use the right-anchored tail:
  // 1/omega concentrates its mass near the left cut for large N, and a
  // difference of cumulatives would cancel catastrophically there.
  if (b >= inv_omega_.upper()) return inv_omega_.tail_to(lo);
  return inv_omega_.between(lo, b);
}

double Weights::psi(double x) const {
  if (x < kPsiLimitCut) return 1.0 / (1.0 + p_.r0);
  return std::exp(log_big_f(x, p_)) * inv_f_.cumulative_to(x) / coeffs(x, p_).f;
}

double Weights::phi(double x) const { return phi_density_.cumulative_to(x); }

double Weights::psi_direct(double x) const {
  if (x < kPsiLimitCut) return 1.0 / (1.0 + p_.r0);
  const ModelParams p = p_;
  const double ifx =
      integrate_value([p](double y) { return std::exp(-log_big_f(y, p)); }, 0.0, x);
  return std::exp(log_big_f(x, p_)) * ifx / coeffs(x, p_).f;
}

double Weights::phi_direct(double x) const {
  const ModelParams p = p_;
  return integrate_value(
      [p](double y) {
        const double g = integrate_value(
            [p](double v) { return std::exp(-log_big_f(v, p)); }, 0.0, y, 1e-13, 1e-13);
        return g * g / omega(y, p);
      },
      0.0, x, 1e-11, 1e-11);
}

namespace {

struct ParamKey {
  double n, r0;
  bool operator<(const ParamKey& o) const {
    return n < o.n || (n == o.n && r0 < o.r0);
  }
};

}  // namespace

std::shared_ptr<const Weights> shared_weights(const ModelParams& p) {
  static std::mutex mu;
  static std::map<ParamKey, std::shared_ptr<const Weights>> cache;
  const ParamKey key{p.n, p.r0};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto built = std::make_shared<const Weights>(p);
  std::lock_guard<std::mutex> lock(mu);
  auto [it, inserted] = cache.emplace(key, built);
  return it->second;
}

double psi_weight(double x, const ModelParams& p) { return shared_weights(p)->psi(x); }
double phi_weight(double x, const ModelParams& p) { return shared_weights(p)->phi(x); }

namespace {

// Supremum of fn(u) (u = ln r) by a fixed dense scan plus a parabolic vertex
// refinement of the best triple.
double sup_dense_scan(const std::function<double(double)>& fn_of_u, double u_lo,
                      double u_hi, int n_points) {
  double best = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  std::vector<double> vals(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double u = u_lo + (u_hi - u_lo) * i / (n_points - 1.0);
    vals[i] = fn_of_u(u);
    if (vals[i] > best) {
      best = vals[i];
      best_i = i;
    }
  }
  if (best_i > 0 && best_i < n_points - 1) {
    const double h = (u_hi - u_lo) / (n_points - 1.0);
    const double um = u_lo + h * best_i;
    const double f0 = vals[best_i - 1], f1 = vals[best_i], f2 = vals[best_i + 1];
    const double denom = f0 - 2.0 * f1 + f2;
    if (denom < 0.0) {
      const double du = 0.5 * h * (f0 - f2) / denom;
      if (std::abs(du) < h) best = std::max(best, fn_of_u(um + du));
    }
  }
  return best;
}

double sup_golden_section(const std::function<double(double)>& fn_of_u, double u_lo,
                          double u_hi) {
  // Coarse bracket first: the product profile is unimodal in practice.
  const int n_coarse = 64;
  double best = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < n_coarse; ++i) {
    const double u = u_lo + (u_hi - u_lo) * i / (n_coarse - 1.0);
    const double v = fn_of_u(u);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  const double h = (u_hi - u_lo) / (n_coarse - 1.0);
  double a = u_lo + h * std::max(0, best_i - 1);
  double b = u_lo + h * std::min(n_coarse - 1, best_i + 1);
  const double phi_ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi_ratio * (b - a), x2 = a + phi_ratio * (b - a);
  double f1 = fn_of_u(x1), f2 = fn_of_u(x2);
  for (int it = 0; it < 120 && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi_ratio * (b - a);
      f2 = fn_of_u(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi_ratio * (b - a);
      f1 = fn_of_u(x1);
    }
  }
  return std::max(std::max(f1, f2), best);
}

}  // namespace

double hardy_constant_A(const ModelParams& p, HardyVariant variant, SupStrategy strategy) {
  if (variant == HardyVariant::psi_weighted) {
    // f(x) psi(x) = F(x) IF(x) ~ x near the origin, so int_0^r dx/(f psi)
    // diverges logarithmically for every r: the supremum is +infinity.
    return std::numeric_limits<double>::infinity();
  }
  auto weights = shared_weights(p);
  const auto product_of_u = [&](double u) {
    const double r = std::exp(u);
    return weights->inv_f_cumulative(r) * weights->inv_omega_between(r, 1.0);
  };
  const double u_lo = std::log(1e-8), u_hi = std::log(1.0 - 1e-8);
  if (strategy == SupStrategy::dense_scan)
    return sup_dense_scan(product_of_u, u_lo, u_hi, 10000);
  return sup_golden_section(product_of_u, u_lo, u_hi);
}

double poincare_constant(const ModelParams& p, PoincareVariant variant) {
  auto weights = shared_weights(p);
  if (variant == PoincareVariant::plain) {
    const double eps = kPoincareSplit;
    const double outer = integrate_value(
        [&](double x) {
          return std::exp(-log_big_f(x, p)) * weights->inv_omega_between(x, 1.0);
        },
        eps, 1.0, 1e-12, 1e-12);
    // Near-origin correction via local expansions:
    //   ln F  ~ c1 x + d2 x^2,   1/F ~ 1 - c1 x + e2 x^2,
    //   1/omega ~ (1/((R0+1) x)) (1 + c2 x + c3 x^2).
    const double c1 = 2.0 * p.n * (p.r0 - 1.0) / (p.r0 + 1.0);
    const double d2 = -2.0 * p.n * p.r0 / ((p.r0 + 1.0) * (p.r0 + 1.0));
    const double e2 = 0.5 * c1 * c1 - d2;
    const double beta = p.r0 / (p.r0 + 1.0);
    const double c2 = c1 + beta;
    const double c3 = 0.5 * c1 * c1 + d2 + c1 * beta + beta * beta;
    const double mu = 1.0 / (p.r0 + 1.0);
    const double k_tail = weights->inv_omega_between(eps, 1.0);
    const double i0 = eps - 0.5 * c1 * eps * eps + e2 * eps * eps * eps / 3.0;
    const double a1 = eps - 0.25 * c1 * eps * eps + e2 * eps * eps * eps / 9.0;
    const double a2 =
        c2 * (0.5 * eps * eps - c1 * eps * eps * eps / 6.0);
    const double a3 = c3 * eps * eps * eps / 3.0;
    return outer + k_tail * i0 + mu * (a1 + a2 + a3);
  }

  // phi-weighted variant.
  const double eps = kPhiOuterCut;
  WeightTable inv_omega_phi(
      [&](double y) { return 1.0 / (omega(y, p) * weights->phi(y)); }, eps, 1.0, 1024);
  const double outer = integrate_value(
      [&](double x) {
        return weights->phi(x) * std::exp(-log_big_f(x, p)) * inv_omega_phi.tail_to(x);
      },
      eps, 1.0, 1e-10, 1e-10);
  // The integrand tends to 1/(2(R0+1)) at the origin; the cut below eps is
  // added back at that limiting value.
  return outer + eps / (2.0 * (p.r0 + 1.0));
}

double weighted_norm(const Field& z, WeightKind kind, const ModelParams& p) {
  const Grid& g = *z.grid;
  const int n = g.n_cells;
  if (n < 4) throw std::invalid_argument("weighted_norm: grid too small");
  const std::vector<double>& v = z.values;

  double max_abs = 0.0;
  for (double val : v) max_abs = std::max(max_abs, std::abs(val));
  if (max_abs == 0.0) return 0.0;

  if (kind == WeightKind::omega_inverse) {
    // The weight behaves like 1/((R0+1)x): the integral only exists when the
    // field vanishes at the degenerate end.  Judge that against the first
    // cells themselves: profiles tending to a nonzero limit extrapolate to
    // roughly their near-end magnitude (ratio ~ 1), while vanishing profiles
    // (linear, square-root, boundary layers) extrapolate to a small fraction
    // of it.  A global-max comparison would misclassify boundary layers whose
    // near-end values are tiny but genuinely vanishing.
    const double boundary = std::abs(1.5 * v[0] - 0.5 * v[1]);
    const double local = std::max(std::abs(v[0]), std::abs(v[1]));
    if (local > 1e-14 * max_abs && boundary > 0.9 * local)
      throw std::domain_error(
          "weighted_norm: divergent (field does not vanish at x = 0 under the "
          "omega^{-1} weight)");
  }

  const bool derivative_based = (kind == WeightKind::big_f || kind == WeightKind::phi_big_f);
  std::shared_ptr<const Weights> weights;
  if (kind == WeightKind::psi || kind == WeightKind::phi_big_f) weights = shared_weights(p);

  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = g.centers[i];
    double integrand;
    if (derivative_based) {
      double dz;
      if (i == 0)
        dz = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * g.dx);
      else if (i == n - 1)
        dz = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * g.dx);
      else
        dz = (v[i + 1] - v[i - 1]) / (2.0 * g.dx);
      double w = big_f(x, p);
      if (kind == WeightKind::phi_big_f) w *= weights->phi(x);
      integrand = w * dz * dz;
    } else {
      double w = 1.0;
      if (kind == WeightKind::omega_inverse) w = 1.0 / omega(x, p);
      else if (kind == WeightKind::psi) w = weights->psi(x);
      integrand = w * v[i] * v[i];
    }
    sum += integrand;
  }
  return sum * g.dx;
}

}  // namespace epidiff
