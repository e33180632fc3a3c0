#include "epidiff/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace epidiff {

std::vector<double> Tridiagonal::apply(const std::vector<double>& x) const {
  const int n = size();
  std::vector<double> y(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = diag[i] * x[i];
    if (i > 0) acc += sub[i] * x[i - 1];
    if (i < n - 1) acc += sup[i] * x[i + 1];
    y[i] = acc;
  }
  return y;
}

std::vector<double> Tridiagonal::apply_affine(const std::vector<double>& x, double alpha,
                                              double beta) const {
  std::vector<double> y = apply(x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = alpha * y[i] + beta * x[i];
  return y;
}

std::vector<double> thomas_solve(const Tridiagonal& a, std::vector<double> rhs) {
  const int n = a.size();
  if (static_cast<int>(rhs.size()) != n)
    throw std::invalid_argument("thomas_solve: size mismatch");
  std::vector<double> c_prime(n, 0.0);
  double pivot = a.diag[0];
  if (std::abs(pivot) < 1e-300)
    throw std::runtime_error("thomas_solve: vanishing pivot at index 0");
  c_prime[0] = a.sup[0] / pivot;
  rhs[0] /= pivot;
  for (int i = 1; i < n; ++i) {
    pivot = a.diag[i] - a.sub[i] * c_prime[i - 1];
    if (std::abs(pivot) < 1e-300)
      throw std::runtime_error("thomas_solve: vanishing pivot at index " +
                               std::to_string(i));
    c_prime[i] = a.sup[i] / pivot;
    rhs[i] = (rhs[i] - a.sub[i] * rhs[i - 1]) / pivot;
  }
  for (int i = n - 2; i >= 0; --i) rhs[i] -= c_prime[i] * rhs[i + 1];
  return rhs;
}

namespace {

// Number of eigenvalues of the symmetric tridiagonal (d, e) strictly below x,
// by the classic LDL^T sign count.
int sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
  const int n = static_cast<int>(d.size());
  int count = 0;
  double q = d[0] - x;
  if (q < 0.0) ++count;
  for (int i = 1; i < n; ++i) {
    double denom = q;
    if (denom == 0.0) denom = 1e-300;
    q = d[i] - x - e[i - 1] * e[i - 1] / denom;
    if (q < 0.0) ++count;
  }
  return count;
}

}  // namespace

std::vector<double> symmetric_tridiag_eigenvalues(const std::vector<double>& diag,
                                                  const std::vector<double>& offdiag,
                                                  int n_eigs, double rel_tol) {
  const int n = static_cast<int>(diag.size());
  if (static_cast<int>(offdiag.size()) != n - 1)
    throw std::invalid_argument("eigenvalues: offdiag must have n-1 entries");
  if (n_eigs < 1 || n_eigs > n) throw std::invalid_argument("eigenvalues: bad count");

  // Gershgorin bounds.
  double lo = diag[0], hi = diag[0];
  for (int i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(offdiag[i - 1]);
    if (i < n - 1) radius += std::abs(offdiag[i]);
    lo = std::min(lo, diag[i] - radius);
    hi = std::max(hi, diag[i] + radius);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi)) + 1e-300;

  std::vector<double> out(n_eigs);
  for (int k = 0; k < n_eigs; ++k) {
    double a = lo, b = hi;
    // Invariant: count(a) <= k < count(b).
    while (b - a > rel_tol * scale) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (sturm_count(diag, offdiag, mid) > k)
        b = mid;
      else
        a = mid;
    }
    out[k] = 0.5 * (a + b);
  }
  return out;
}

std::vector<double> symmetric_tridiag_eigenvector(
    const std::vector<double>& diag, const std::vector<double>& offdiag, double lambda,
    const std::vector<std::vector<double>>& orthogonalize_against) {
  const int n = static_cast<int>(diag.size());
  double scale = 0.0;
  for (double d : diag) scale = std::max(scale, std::abs(d));
  for (double e : offdiag) scale = std::max(scale, std::abs(e));

  Tridiagonal shifted(n);
  const double jitter = 1e-12 * (scale + std::abs(lambda));
  for (int i = 0; i < n; ++i) shifted.diag[i] = diag[i] - lambda + jitter;
  for (int i = 1; i < n; ++i) shifted.sub[i] = offdiag[i - 1];
  for (int i = 0; i + 1 < n; ++i) shifted.sup[i] = offdiag[i];

  // Deterministic quasi-random start vector.
  std::vector<double> v(n);
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  for (int i = 0; i < n; ++i) {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    v[i] = static_cast<double>(state % 1000003u) / 1000003.0 - 0.5;
  }

  auto orthogonalize = [&](std::vector<double>& w) {
    for (const auto& u : orthogonalize_against) {
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += u[i] * w[i];
      for (int i = 0; i < n; ++i) w[i] -= dot * u[i];
    }
  };
  auto normalize = [&](std::vector<double>& w) {
    double nrm = 0.0;
    for (double wi : w) nrm += wi * wi;
    nrm = std::sqrt(nrm);
    if (nrm < 1e-300) throw std::runtime_error("inverse iteration: degenerate vector");
    for (double& wi : w) wi /= nrm;
    return nrm;
  };

  orthogonalize(v);
  normalize(v);
  for (int iter = 0; iter < 8; ++iter) {
    std::vector<double> w;
    try {
      w = thomas_solve(shifted, v);
    } catch (const std::runtime_error&) {
      // Exactly singular shift: nudge and retry once.
      for (int i = 0; i < n; ++i) shifted.diag[i] += jitter;
      w = thomas_solve(shifted, v);
    }
    orthogonalize(w);
    const double growth = normalize(w);
    double delta = 0.0;
    for (int i = 0; i < n; ++i) {
      // Eigenvectors are sign-ambiguous; compare against both orientations.
      delta = std::max(delta, std::abs(std::abs(w[i]) - std::abs(v[i])));
    }
    v.swap(w);
    if (iter >= 1 && (growth > 1e8 || delta < 1e-13)) break;
  }
  return v;
}

}  // namespace epidiff
