#include "epidiff/model.hpp"

#include <cmath>
#include <string>

namespace epidiff {

namespace {

void check_unit_interval(double x, const char* who) {
  if (!(x >= -1e-12 && x <= 1.0 + 1e-12))
    throw std::domain_error(std::string(who) + ": x out of [0,1]: " + std::to_string(x));
}

}  // namespace

CoeffPair coeffs(double x, const ModelParams& p) {
  check_unit_interval(x, "coeffs");
  const double fx = x * (p.r0 * (1.0 - x) + 1.0);
  const double gx = x * (p.r0 * (1.0 - x) - 1.0);
  return {fx, gx};
}

double drift_ratio(double x, const ModelParams& p) {
  check_unit_interval(x, "drift_ratio");
  // g/f = 1 - 2/(R0(1-x)+1); removable at x = 0, finite on the whole interval.
  return 1.0 - 2.0 / (p.r0 * (1.0 - x) + 1.0);
}

double log_big_f(double x, const ModelParams& p) {
  check_unit_interval(x, "log_big_f");
  if (p.r0 < 1e-12) return -2.0 * p.n * x;
  const double top = p.r0 * (1.0 - x) + 1.0;
  return 2.0 * p.n * x + (4.0 * p.n / p.r0) * std::log(top / (p.r0 + 1.0));
}

double big_f(double x, const ModelParams& p) { return std::exp(log_big_f(x, p)); }

double omega(double x, const ModelParams& p) {
  check_unit_interval(x, "omega");
  return coeffs(x, p).f * std::exp(-log_big_f(x, p));
}

double stationary(double x, double c, const ModelParams& p) {
  check_unit_interval(x, "stationary");
  if (c == 0.0) return 0.0;
  if (x <= 0.0)
    throw std::domain_error("stationary: density diverges like C/((R0+1)x) at x = 0");
  return c * std::exp(log_big_f(x, p)) / coeffs(x, p).f;
}

GeneralCoefficients sis_general_coefficients(const ModelParams& p) {
  const double n = p.n, r0 = p.r0;
  GeneralCoefficients c;
  c.domain_length = 1.0;
  c.a0 = [n, r0](double x, double) { return (r0 + 1.0 - r0 * x) / (2.0 * n); };
  c.a1 = [n, r0](double x, double) {
    return (r0 + 1.0 - 2.0 * r0 * x) / n - x * (r0 - 1.0 - r0 * x);
  };
  c.a2 = [n, r0](double x, double) { return -r0 / n - r0 + 1.0 + 2.0 * r0 * x; };
  c.forcing = [](double, double) { return 0.0; };
  c.a0_x = [n, r0](double, double) { return -r0 / (2.0 * n); };
  c.a0_xx = [](double, double) { return 0.0; };
  c.a1_x = [n, r0](double x, double) { return -2.0 * r0 / n - (r0 - 1.0) + 2.0 * r0 * x; };
  c.b1 = [n](double) { return 1.0 / (2.0 * n); };
  c.b2 = [n, r0](double) { return (1.0 - r0) / (2.0 * n) + 1.0; };
  c.boundary_data = [](double) { return 0.0; };
  return c;
}

}  // namespace epidiff
