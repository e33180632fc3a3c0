#pragma once

#include <functional>
#include <stdexcept>

namespace epidiff {

/// Parameters of the SIS drift-diffusion model: population size N and
/// basic reproductive factor R0.  Construction validates the ranges.
struct ModelParams {
  double n;
  double r0;

  ModelParams(double n_, double r0_) : n(n_), r0(r0_) {
    if (!(n >= 1.0)) throw std::invalid_argument("ModelParams: N must be >= 1");
    if (!(r0 >= 0.0)) throw std::invalid_argument("ModelParams: R0 must be >= 0");
  }
};

struct CoeffPair {
  double f;  ///< diffusion-side coefficient f(x) = x(R0(1-x)+1)
  double g;  ///< drift coefficient          g(x) = x(R0(1-x)-1)
};

/// f and g at a point of [0,1].
CoeffPair coeffs(double x, const ModelParams& p);

/// The ratio g(x)/f(x) = 1 - 2/(R0(1-x)+1), finite on all of [0,1].
double drift_ratio(double x, const ModelParams& p);

/// ln F(x) where F(x) = exp(2N int_0^x g/f).  Closed form in both branches.
double log_big_f(double x, const ModelParams& p);

/// Integrating factor F(x); F(0) = 1.
double big_f(double x, const ModelParams& p);

/// Stationary weight omega(x) = f(x)/F(x); omega(0) = 0, omega ~ (R0+1)x near 0.
double omega(double x, const ModelParams& p);

/// Stationary solution P_s(x) = C/omega(x) = C F(x)/f(x).
/// Throws for x = 0 with C > 0 (the density blows up like C/((R0+1)x)).
double stationary(double x, double c, const ModelParams& p);

/// Coefficient set of the general degenerate problem
///   u_t = x a0(x,t) u_xx + a1(x,t) u_x + a2(x,t) u + forcing(x,t)  on (0,l),
/// with the third-kind condition b1(t) u_x + b2(t) u = boundary_data(t) at x = l
/// and no condition at the degenerate end x = 0.
struct GeneralCoefficients {
  using SpaceTimeFn = std::function<double(double, double)>;  // (x, t)
  using TimeFn = std::function<double(double)>;               // (t)

  SpaceTimeFn a0;
  SpaceTimeFn a1;
  SpaceTimeFn a2;
  SpaceTimeFn forcing;

  // Optional exact derivative providers; when absent, consumers fall back to
  // centered finite differences (at looser tolerance).
  SpaceTimeFn a0_x;
  SpaceTimeFn a0_xx;
  SpaceTimeFn a1_x;

  TimeFn b1;
  TimeFn b2;
  TimeFn boundary_data;

  double domain_length = 1.0;

  bool has_exact_derivatives() const {
    return static_cast<bool>(a0_x) && static_cast<bool>(a0_xx) && static_cast<bool>(a1_x);
  }
};

/// The SIS model rewritten in general form: polynomial coefficients with exact
/// derivatives, zero forcing, homogeneous boundary data, l = 1.
GeneralCoefficients sis_general_coefficients(const ModelParams& p);

}  // namespace epidiff
