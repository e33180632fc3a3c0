#pragma once

#include <functional>
#include <vector>

#include "epidiff/grid.hpp"
#include "epidiff/model.hpp"

namespace epidiff {

/// Square-root coordinate change s(x) = int_0^x sqrt(2N / f(y)) dy in closed
/// form, with its inverse and the image half-length s1 = s(1).
class CoordinateMap {
 public:
  explicit CoordinateMap(const ModelParams& p);

  double forward(double x) const;   // s(x), x in [0, 1]
  double inverse(double s) const;   // x(s), s in [0, s1]
  double s1() const { return s1_; }
  const ModelParams& params() const { return p_; }

 private:
  ModelParams p_;
  double s1_;
};

/// Drift of the transformed generator in s-coordinates; l(0) = 0 and
/// l(s)/s -> (R0 - 1)/2 as s -> 0.
double drift_l(double s, const ModelParams& p);

/// Schroedinger potential q = (l' + l^2/2)/2 of the symmetrized transform
/// chain, evaluated through the x-route closed forms.  q(0) = (R0-1)/4; for
/// R0 = 0 the closed arithmetic collapses to q(s) = s^2/16 - 1/4.
double potential_q(double s, const ModelParams& p);

/// Discrete Sturm-Liouville basis of -S'' + qS = lambda S on (0, s1) with a
/// Dirichlet node at 0 and a mirrored-ghost zero-derivative closure at s1.
struct SpectralBasis {
  ModelParams params;
  double s1 = 0.0;
  double h = 0.0;                       // node spacing
  std::vector<double> s_nodes;          // 0, h, ..., s1  (M+1 entries)
  std::vector<double> sqrt_p;           // sqrt(F(x(s_j))) at the nodes
  std::vector<double> lambdas;          // increasing, n_modes of them
  std::vector<std::vector<double>> modes;  // U_k at all nodes (U_k[0] = 0),
                                           // trapezoid-orthonormal

  int n_modes() const { return static_cast<int>(lambdas.size()); }
  int n_grid() const { return static_cast<int>(s_nodes.size()) - 1; }

  /// Linear interpolation of mode k at s.
  double mode_at(int k, double s) const;
};

/// Computes the lowest n_modes eigenpairs on an n_grid-node mesh
/// (requires n_grid >= 50 * n_modes).  `potential_override` substitutes a
/// different potential, e.g. the zero potential whose discrete eigenvalues
/// have the closed form (4/h^2) sin^2((k+1/2) pi / (2M)).
SpectralBasis eigensolve(const ModelParams& p, int n_modes, int n_grid,
                         const std::function<double(double)>& potential_override = {});

/// Expansion coefficients of z0 against the basis: c_k = <sqrt(p) z0, U_k>.
/// z0 is given in x-coordinates and transported through the map; it must
/// vanish at x = 0 (checked by extrapolation, tolerance 1e-6 relative).
std::vector<double> project_initial(const std::function<double(double)>& z0_of_x,
                                    const SpectralBasis& basis);
std::vector<double> project_initial(const Field& z0, const SpectralBasis& basis);

/// Series evaluation z(x, t) = sum_k c_k e^{-lambda_k t} U_k(s(x)) / sqrt(F(x)).
double evaluate_series(const SpectralBasis& basis, const std::vector<double>& coeffs,
                       double x, double t);

/// Same but returning the density p = z / omega (x must be positive).
double evaluate_series_density(const SpectralBasis& basis, const std::vector<double>& coeffs,
                               double x, double t);

/// Lowest generalized eigenvalue of the conservative z-form finite-volume
/// operator (omega-weighted), for cross-checking the transform chain.
std::vector<double> zform_operator_eigenvalues(const ModelParams& p, int n_cells,
                                               int n_eigs = 1);

}  // namespace epidiff
