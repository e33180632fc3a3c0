#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace epidiff {

/// Tridiagonal matrix in banded storage.  sub[0] and sup[n-1] are unused.
struct Tridiagonal {
  std::vector<double> sub, diag, sup;

  explicit Tridiagonal(int n = 0) : sub(n, 0.0), diag(n, 0.0), sup(n, 0.0) {}
  int size() const { return static_cast<int>(diag.size()); }

  /// y = A x
  std::vector<double> apply(const std::vector<double>& x) const;

  /// y = alpha * A x + beta * x
  std::vector<double> apply_affine(const std::vector<double>& x, double alpha,
                                   double beta) const;
};

/// Solves A x = rhs by the Thomas algorithm (no pivoting).  Throws
/// std::runtime_error naming the pivot index if a pivot falls below
/// 1e-300 in magnitude.
std::vector<double> thomas_solve(const Tridiagonal& a, std::vector<double> rhs);

/// Eigenvalues of a symmetric tridiagonal matrix by Sturm-sequence bisection:
/// returns the lowest n_eigs eigenvalues in increasing order.
std::vector<double> symmetric_tridiag_eigenvalues(const std::vector<double>& diag,
                                                  const std::vector<double>& offdiag,
                                                  int n_eigs, double rel_tol = 1e-13);

/// Eigenvector of a symmetric tridiagonal matrix for a converged eigenvalue,
/// by shifted inverse iteration; the result is unit-norm in the Euclidean
/// sense.  `orthogonalize_against` handles clustered eigenvalues.
std::vector<double> symmetric_tridiag_eigenvector(
    const std::vector<double>& diag, const std::vector<double>& offdiag, double lambda,
    const std::vector<std::vector<double>>& orthogonalize_against = {});

}  // namespace epidiff
