#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>

namespace vsa {

struct LanczosOptions {
  std::size_t n_eig = 1;
  double tol = 1e-10;
  /// Cap on operator applications; 0 picks a default.
  std::size_t max_iter = 0;
  std::uint64_t seed = 0;
  /// Krylov basis size; 0 picks max(2 n_eig + 10, n_eig + 20).
  std::size_t basis = 0;
};

struct LanczosResult {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // orthonormal columns
  Eigen::VectorXd residuals;
  std::size_t matvecs = 0;
};

/// y = A x for a symmetric operator of dimension n.
using LinearOperator = std::function<void(const double* x, double* y)>;

/// Largest-algebraic eigenpairs of a symmetric operator by thick-restart Lanczos with full
/// reorthogonalization. Columns of `locked` (orthonormal, invariant under A) are deflated:
/// the search runs in their orthogonal complement. Throws ConvergenceError when the budget
/// runs out.
LanczosResult lanczos_largest(std::size_t n, const LinearOperator& apply,
                              const LanczosOptions& options,
                              const Eigen::MatrixXd* locked = nullptr);

}  // namespace vsa
