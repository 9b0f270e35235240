#include "vsa/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vsa/error.hpp"

namespace vsa {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Two passes of classical Gram-Schmidt against the first `cols` columns of V and `locked`.
// Returns the coefficients against V.
VectorXd orthogonalize(const MatrixXd& V, std::size_t cols, const MatrixXd* locked,
                       Eigen::Ref<VectorXd> w) {
  VectorXd h = VectorXd::Zero(static_cast<Eigen::Index>(cols));
  const auto c = static_cast<Eigen::Index>(cols);
  for (int pass = 0; pass < 2; ++pass) {
    if (locked && locked->cols() > 0) w -= *locked * (locked->transpose() * w);
    if (c > 0) {
      VectorXd g = V.leftCols(c).transpose() * w;
      w -= V.leftCols(c) * g;
      h += g;
    }
  }
  return h;
}

}  // namespace

LanczosResult lanczos_largest(std::size_t n, const LinearOperator& apply,
                              const LanczosOptions& opt, const MatrixXd* locked) {
  const std::size_t n_locked = locked ? static_cast<std::size_t>(locked->cols()) : 0;
  if (n == 0 || opt.n_eig == 0) throw ValidationError("eigensolve needs n > 0 and n_eig > 0");
  if (opt.n_eig + n_locked > n) throw ValidationError("n_eig exceeds the operator dimension");
  const std::size_t dim = n - n_locked;
  std::size_t m = opt.basis ? opt.basis : std::max(2 * opt.n_eig + 10, opt.n_eig + 20);
  m = std::min(m, dim);
  m = std::max(m, opt.n_eig);
  const std::size_t max_matvec = opt.max_iter ? opt.max_iter : std::max<std::size_t>(5000, 50 * m);
  const auto N = static_cast<Eigen::Index>(n);

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  MatrixXd V(N, static_cast<Eigen::Index>(m + 1));
  MatrixXd T = MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  VectorXd w(N);
  LanczosResult res;

  auto random_unit = [&](std::size_t cols) -> bool {
    for (int attempt = 0; attempt < 8; ++attempt) {
      VectorXd v(N);
      for (auto& x : v) x = normal(rng);
      orthogonalize(V, cols, locked, v);
      const double nv = v.norm();
      if (nv > 1e-8) {
        V.col(static_cast<Eigen::Index>(cols)) = v / nv;
        return true;
      }
    }
    return false;
  };

  if (!random_unit(0)) throw NumericalError("could not draw a Lanczos start vector");
  std::size_t k = 0;  // kept Ritz vectors at the top of V
  double beta_last = 0.0;

  while (true) {
    for (std::size_t j = k; j < m; ++j) {
      const auto J = static_cast<Eigen::Index>(j);
      apply(V.col(J).data(), w.data());
      ++res.matvecs;
      VectorXd h = orthogonalize(V, j + 1, locked, w);
      T(J, J) = h(J);
      double beta = w.norm();
      if (j + 1 == dim) {
        beta = 0.0;
      } else if (beta < 1e-10 * std::max(1.0, std::abs(h(J)))) {
        // Invariant subspace found: continue with a fresh direction and zero coupling.
        beta = 0.0;
        if (!random_unit(j + 1)) throw NumericalError("Lanczos basis exhausted");
      } else {
        V.col(J + 1) = w / beta;
      }
      if (j + 1 < m) T(J, J + 1) = T(J + 1, J) = beta;
      beta_last = beta;
      if (j + 1 == dim) {
        m = j + 1;
        break;
      }
    }

    const auto M = static_cast<Eigen::Index>(m);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(T.topLeftCorner(M, M));
    // Descending order.
    VectorXd theta = eig.eigenvalues().reverse();
    MatrixXd Y = eig.eigenvectors().rowwise().reverse();
    const auto want = static_cast<Eigen::Index>(opt.n_eig);
    VectorXd est = (beta_last * Y.row(M - 1).transpose()).cwiseAbs();

    bool converged = (est.head(want).array() <= opt.tol).all() || m == dim;
    if (converged) {
      MatrixXd X = V.leftCols(M) * Y.leftCols(want);
      VectorXd true_res(want);
      VectorXd ax(N);
      for (Eigen::Index i = 0; i < want; ++i) {
        apply(X.col(i).data(), ax.data());
        ++res.matvecs;
        if (locked && locked->cols() > 0) ax -= *locked * (locked->transpose() * ax);
        true_res(i) = (ax - theta(i) * X.col(i)).norm();
      }
      if ((true_res.array() <= opt.tol).all() || m == dim) {
        res.values = theta.head(want);
        res.vectors = std::move(X);
        res.residuals = true_res;
        if (res.residuals.maxCoeff() > opt.tol && m == dim) {
          // Full-dimensional Krylov space: the Ritz pairs are exact up to rounding.
          if (res.residuals.maxCoeff() > std::max(opt.tol, 1e-8)) {
            throw ConvergenceError(res.residuals.maxCoeff(), "Lanczos residual check failed");
          }
        }
        return res;
      }
    }
    if (res.matvecs >= max_matvec) {
      throw ConvergenceError(est.head(want).maxCoeff(),
                             "Lanczos did not converge within " + std::to_string(max_matvec) +
                                 " operator applications");
    }

    // Thick restart: keep p Ritz vectors plus the residual direction.
    const std::size_t p = std::min(m - 1, opt.n_eig + (m - opt.n_eig) / 2);
    const auto P = static_cast<Eigen::Index>(p);
    MatrixXd kept = V.leftCols(M) * Y.leftCols(P);
    V.col(P) = V.col(M);
    if (beta_last == 0.0) {
      // Residual direction undefined; the next block starts from a fresh random vector.
      V.leftCols(P) = kept;
      if (!random_unit(p)) throw NumericalError("Lanczos basis exhausted");
    } else {
      V.leftCols(P) = kept;
    }
    T.setZero();
    for (Eigen::Index i = 0; i < P; ++i) {
      T(i, i) = theta(i);
      T(i, P) = T(P, i) = beta_last * Y(M - 1, i);
    }
    k = p;
  }
}

}  // namespace vsa
