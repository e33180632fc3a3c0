#include "epidiff/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "epidiff/solver.hpp"
#include "epidiff/tridiag.hpp"

namespace epidiff {

namespace {
constexpr double kR0Tiny = 1e-12;
}

CoordinateMap::CoordinateMap(const ModelParams& p) : p_(p) {
  if (p_.r0 < kR0Tiny) {
    s1_ = 2.0 * std::sqrt(2.0 * p_.n);
  } else {
    s1_ = 2.0 * std::sqrt(2.0 * p_.n / p_.r0) *
          std::asin(std::sqrt(p_.r0 / (p_.r0 + 1.0)));
  }
}

double CoordinateMap::forward(double x) const {
  x = std::clamp(x, 0.0, 1.0);
  if (p_.r0 < kR0Tiny) return 2.0 * std::sqrt(2.0 * p_.n * x);
  const double arg = std::sqrt(std::clamp(p_.r0 * x / (p_.r0 + 1.0), 0.0, 1.0));
  return 2.0 * std::sqrt(2.0 * p_.n / p_.r0) * std::asin(arg);
}

double CoordinateMap::inverse(double s) const {
  s = std::clamp(s, 0.0, s1_);
  if (p_.r0 < kR0Tiny) return s * s / (8.0 * p_.n);
  const double sn = std::sin(0.5 * std::sqrt(p_.r0 / (2.0 * p_.n)) * s);
  return std::clamp((p_.r0 + 1.0) / p_.r0 * sn * sn, 0.0, 1.0);
}

double drift_l(double s, const ModelParams& p) {
  if (p.r0 < kR0Tiny) return -0.5 * s;
  const double theta = 0.5 * std::sqrt(p.r0 / (2.0 * p.n)) * s;
  const double sn = std::sin(theta), cs = std::abs(std::cos(theta));
  if (cs < 1e-300) throw std::domain_error("drift_l: coordinate outside the map image");
  return std::sqrt(2.0 * p.n / p.r0) * sn * (p.r0 - 1.0 - (p.r0 + 1.0) * sn * sn) / cs;
}

double potential_q(double s, const ModelParams& p) {
  const CoordinateMap map(p);
  const double x = map.inverse(s);
  if (x < 1e-14) return 0.25 * (p.r0 - 1.0);
  // q = (l' + l^2/2)/2 routed through x: l' = g' - g f'/(2f), l^2/2 = N g^2/f,
  // with g/f kept as the regular ratio to avoid 0/0 near the origin.
  const auto [f, g] = coeffs(x, p);
  const double c = drift_ratio(x, p);
  const double gp = (p.r0 - 1.0) - 2.0 * p.r0 * x;
  const double fp = (p.r0 + 1.0) - 2.0 * p.r0 * x;
  return 0.5 * (gp - 0.5 * c * fp + p.n * c * g);
}

double SpectralBasis::mode_at(int k, double s) const {
  const std::vector<double>& u = modes.at(k);
  if (s <= 0.0) return u.front();
  if (s >= s1) return u.back();
  const double pos = s / h;
  const int j = std::min(static_cast<int>(pos), static_cast<int>(u.size()) - 2);
  const double frac = pos - j;
  return u[j] * (1.0 - frac) + u[j + 1] * frac;
}

SpectralBasis eigensolve(const ModelParams& p, int n_modes, int n_grid,
                         const std::function<double(double)>& potential_override) {
  if (n_modes < 1) throw std::invalid_argument("eigensolve: need n_modes >= 1");
  if (n_grid < 50 * n_modes)
    throw std::invalid_argument("eigensolve: n_grid must be at least 50 * n_modes");

  SpectralBasis basis{p, 0.0, 0.0, {}, {}, {}, {}};
  const CoordinateMap map(p);
  const int m = n_grid;
  basis.s1 = map.s1();
  basis.h = basis.s1 / m;
  basis.s_nodes.resize(m + 1);
  basis.sqrt_p.resize(m + 1);
  for (int j = 0; j <= m; ++j) {
    basis.s_nodes[j] = basis.s1 * static_cast<double>(j) / m;
    basis.sqrt_p[j] = std::exp(0.5 * log_big_f(map.inverse(basis.s_nodes[j]), p));
  }

  auto q_at = [&](double s) {
    return potential_override ? potential_override(s) : potential_q(s, p);
  };

  // Unknowns are the nodes 1..m (Dirichlet at 0).  The mirrored-ghost
  // zero-derivative row at s1 is carried by a half-mass node; the similarity
  // V_m = U_m / sqrt(2) makes the matrix symmetric with a -sqrt(2)/h^2 last
  // off-diagonal, without changing the spectrum.
  const double inv_h2 = 1.0 / (basis.h * basis.h);
  std::vector<double> diag(m), off(m - 1);
  for (int j = 1; j <= m; ++j) diag[j - 1] = 2.0 * inv_h2 + q_at(basis.s_nodes[j]);
  for (int j = 0; j < m - 1; ++j) off[j] = -inv_h2;
  off[m - 2] = -std::sqrt(2.0) * inv_h2;

  basis.lambdas = symmetric_tridiag_eigenvalues(diag, off, n_modes);

  basis.modes.reserve(n_modes);
  std::vector<std::vector<double>> cluster;  // raw vectors of the current cluster
  for (int k = 0; k < n_modes; ++k) {
    const bool clustered =
        k > 0 && std::abs(basis.lambdas[k] - basis.lambdas[k - 1]) <
                     1e-3 * (std::abs(basis.lambdas[k]) + 1.0);
    if (!clustered) cluster.clear();
    std::vector<double> v = symmetric_tridiag_eigenvector(diag, off, basis.lambdas[k], cluster);
    cluster.push_back(v);

    std::vector<double> u(m + 1, 0.0);
    for (int j = 1; j <= m; ++j) u[j] = v[j - 1];
    u[m] *= std::sqrt(2.0);

    // Trapezoid normalization on the s-grid (half weight at the ends).
    double nrm2 = 0.0;
    for (int j = 1; j < m; ++j) nrm2 += u[j] * u[j];
    nrm2 += 0.5 * u[m] * u[m];
    nrm2 *= basis.h;
    const double scale = 1.0 / std::sqrt(nrm2);
    double max_abs = 0.0;
    for (double uj : u) max_abs = std::max(max_abs, std::abs(uj));
    double sign = 1.0;
    for (int j = 0; j <= m; ++j) {
      if (std::abs(u[j]) > 1e-8 * max_abs) {
        sign = (u[j] > 0.0) ? 1.0 : -1.0;
        break;
      }
    }
    for (double& uj : u) uj *= sign * scale;
    basis.modes.push_back(std::move(u));
  }
  return basis;
}

namespace {

std::vector<double> project_values(const SpectralBasis& basis,
                                   const std::vector<double>& z_at_nodes) {
  const int m = basis.n_grid();
  std::vector<double> c(basis.n_modes(), 0.0);
  for (int k = 0; k < basis.n_modes(); ++k) {
    double acc = 0.0;
    for (int j = 1; j < m; ++j)
      acc += basis.sqrt_p[j] * z_at_nodes[j] * basis.modes[k][j];
    acc += 0.5 * basis.sqrt_p[m] * z_at_nodes[m] * basis.modes[k][m];
    c[k] = acc * basis.h;
  }
  return c;
}

}  // namespace

std::vector<double> project_initial(const std::function<double(double)>& z0_of_x,
                                    const SpectralBasis& basis) {
  const CoordinateMap map(basis.params);
  const int m = basis.n_grid();
  std::vector<double> z(m + 1);
  double max_abs = 0.0;
  for (int j = 0; j <= m; ++j) {
    z[j] = z0_of_x(map.inverse(basis.s_nodes[j]));
    max_abs = std::max(max_abs, std::abs(z[j]));
  }
  if (std::abs(z[0]) > 1e-6 * std::max(max_abs, 1e-300))
    throw std::domain_error("project_initial: data does not vanish at x = 0");
  return project_values(basis, z);
}

std::vector<double> project_initial(const Field& z0, const SpectralBasis& basis) {
  const Grid& g = *z0.grid;
  auto interp = [&](double x) {
    if (x <= g.centers.front()) {
      const double t = (x - g.centers.front()) / g.dx;
      return z0.values[0] + t * (z0.values[1] - z0.values[0]);
    }
    if (x >= g.centers.back()) {
      const int n = g.n_cells;
      const double t = (x - g.centers[n - 2]) / g.dx;
      return z0.values[n - 2] + t * (z0.values[n - 1] - z0.values[n - 2]);
    }
    const double pos = (x - g.centers.front()) / g.dx;
    const int i = std::min(static_cast<int>(pos), g.n_cells - 2);
    const double frac = pos - i;
    return z0.values[i] * (1.0 - frac) + z0.values[i + 1] * frac;
  };
  return project_initial(interp, basis);
}

double evaluate_series(const SpectralBasis& basis, const std::vector<double>& coeffs_in,
                       double x, double t) {
  const CoordinateMap map(basis.params);
  const double s = map.forward(x);
  double acc = 0.0;
  for (int k = 0; k < static_cast<int>(coeffs_in.size()); ++k)
    acc += coeffs_in[k] * std::exp(-basis.lambdas[k] * t) * basis.mode_at(k, s);
  return acc * std::exp(-0.5 * log_big_f(x, basis.params));
}

double evaluate_series_density(const SpectralBasis& basis,
                               const std::vector<double>& coeffs_in, double x, double t) {
  if (!(x > 0.0))
    throw std::domain_error("evaluate_series_density: x must be positive");
  return evaluate_series(basis, coeffs_in, x, t) / omega(x, basis.params);
}

std::vector<double> zform_operator_eigenvalues(const ModelParams& p, int n_cells,
                                               int n_eigs) {
  auto grid = Grid::build(n_cells, 0.0, 1.0);
  SpatialOperator op = assemble_operator(p, grid, OperatorForm::z_form);
  // Similarity by sqrt(omega) turns -A into a symmetric matrix with the same
  // spectrum (A = omega K with symmetric K).
  std::vector<double> w(n_cells);
  for (int i = 0; i < n_cells; ++i) w[i] = omega(grid->centers[i], p);
  std::vector<double> diag(n_cells), off(n_cells - 1);
  for (int i = 0; i < n_cells; ++i) diag[i] = -op.matrix.diag[i];
  for (int i = 0; i + 1 < n_cells; ++i)
    off[i] = -op.matrix.sup[i] * std::sqrt(w[i + 1] / w[i]);
  return symmetric_tridiag_eigenvalues(diag, off, n_eigs);
}

}  // namespace epidiff
