#pragma once

#include <memory>

#include "epidiff/grid.hpp"
#include "epidiff/model.hpp"
#include "epidiff/quadrature.hpp"

namespace epidiff {

enum class HardyVariant { plain, psi_weighted };
enum class SupStrategy { dense_scan, golden_section };
enum class PoincareVariant { plain, phi_weighted };
enum class WeightKind { omega_inverse, big_f, psi, phi_big_f, unity };

/// Cached cumulative tables for one parameter set.  Immutable after
/// construction and safe to share across threads.
class Weights {
 public:
  explicit Weights(const ModelParams& p, int n_segments = 2048);
  Weights(const Weights&) = delete;
  Weights& operator=(const Weights&) = delete;

  const ModelParams& params() const { return p_; }

  /// IF(x) = int_0^x dy / F(y).  Regular at 0.
  double inv_f_cumulative(double x) const;

  /// int_a^b dy / omega(y) for 0 < a <= b <= 1 (log-divergent at 0, so the
  /// lower limit must stay positive; the table anchor is 1e-12).
  double inv_omega_between(double a, double b) const;

  /// psi(x) = (1/omega) int_0^x dy/F.  Extends continuously to
  /// psi(0) = 1/(1+R0); below x = 1e-10 the limit value is substituted.
  double psi(double x) const;

  /// phi(x) = 2 int_0^x omega^{-1}(y) (int_0^y F^{-1}(v) int_0^v F^{-1}(s) ds dv) dy,
  /// computed from the cumulative tables; phi(0) = 0, phi ~ x^2/(2(R0+1)).
  double phi(double x) const;

  /// Quadrature-only evaluations used as cross-checks for the table path.
  double psi_direct(double x) const;
  double phi_direct(double x) const;

 private:
  ModelParams p_;
  WeightTable inv_f_;        // integrand 1/F, anchor 0
  WeightTable inv_omega_;    // integrand 1/omega, anchor 1e-12
  WeightTable phi_density_;  // integrand omega^{-1}(y) IF(y)^2, anchor 0
};

/// Shared per-parameter cache so the free-function entry points do not
/// rebuild tables on every call.
std::shared_ptr<const Weights> shared_weights(const ModelParams& p);

double psi_weight(double x, const ModelParams& p);
double phi_weight(double x, const ModelParams& p);

/// Best constant bound A(R0, N) for the Hardy-type inequality on (0,1):
/// the supremum over r of (int_0^r weight_a)(int_r^1 weight_b).
///
/// plain:        weight_a = 1/F, weight_b = 1/omega   (finite for all params).
/// psi_weighted: weight_a = 1/(f psi), weight_b = psi.  Since f(x) psi(x) =
///     F(x) IF(x) ~ x near 0, the first factor diverges logarithmically for
///     every r, so the supremum is +infinity; the function returns +inf and
///     callers should report the variant as divergent.
double hardy_constant_A(const ModelParams& p, HardyVariant variant = HardyVariant::plain,
                        SupStrategy strategy = SupStrategy::golden_section);

/// Weighted Poincare-type constant:
/// plain:        C_P = int_0^1 (1/F)(x) int_x^1 dy/omega(y) dx.
/// phi_weighted: C_P = int_0^1 (phi/F)(x) int_x^1 dy/(omega phi)(y) dx.
double poincare_constant(const ModelParams& p,
                         PoincareVariant variant = PoincareVariant::plain);

/// Midpoint-rule weighted L2-type functional of a field.
///   omega_inverse: int w^{-1} z^2        (requires z(0) = 0; fields whose
///                  extrapolated boundary value is comparable to their first
///                  cell values do not vanish, make the integral divergent,
///                  and raise std::domain_error)
///   big_f:         int F (dz/dx)^2       (centered differences inside,
///                  one-sided second-order at the ends)
///   psi:           int psi z^2
///   phi_big_f:     int phi F (dz/dx)^2
///   unity:         int z^2
double weighted_norm(const Field& z, WeightKind kind, const ModelParams& p);

}  // namespace epidiff
