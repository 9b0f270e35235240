#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "vsa/kernels.hpp"
#include "vsa/sparse.hpp"

namespace vsa {

struct MarkovNormalizers {
  std::vector<double> r;        // K 1 under rho_NS
  std::vector<double> l;        // K (1 / r)
  std::vector<double> l_hat;    // sqrt(l r)
  std::vector<double> l_tilde;  // sqrt(l / r)
};

/// Eigenpairs of the Markov operator. Columns are indexed by j, rows by flat point index.
struct MarkovEigenbasis {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd phi_hat;   // orthonormal under rho_NS
  Eigen::MatrixXd phi;       // P phi_j = lambda_j phi_j, phi_0 = 1
  Eigen::MatrixXd phi_dual;  // P* phi'_j = lambda_j phi'_j, <phi'_i, phi_j> = delta_ij
  std::vector<double> l_tilde;
  std::vector<double> weights;
  Eigen::VectorXd residuals;
  /// j such that |lambda_j - lambda_{j+1}| < 1e-8.
  std::vector<std::size_t> near_degenerate;
};

MarkovNormalizers markov_normalizers(const SparseKernel& kernel, unsigned threads = 0);

/// P_ij = K_ij / (l_i r_j), with the normalizers. Throws on a disconnected point.
std::pair<MarkovNormalizers, CsrMatrix> markov_normalize(const SparseKernel& kernel,
                                                         unsigned threads = 0);

/// max_i |sum_j P_ij w_j - 1| computed from K and the normalizers.
double row_stochasticity_error(const SparseKernel& kernel, const MarkovNormalizers& norm,
                               unsigned threads = 0);

/// Phat_ij = K_ij / (lhat_i lhat_j), built in the kernel's storage.
CsrMatrix symmetrize(SparseKernel&& kernel, const MarkovNormalizers& norm);

struct EigensolveOptions {
  std::size_t n_eig = 51;
  double tol = 1e-10;
  std::size_t max_iter = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  /// Deflate the known top eigenvector sqrt(w) l_tilde and take lambda_0 from its Rayleigh
  /// quotient. Needs l_tilde.
  bool lock_top = true;
};

struct SymmetricEigenpairs {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd phi_hat;  // orthonormal under the weights
  Eigen::VectorXd residuals;
};

/// Largest eigenpairs of the operator f -> sum_j Phat_ij w_j f_j, self-adjoint in L2(w).
SymmetricEigenpairs eigensolve(const CsrMatrix& p_hat, std::span<const double> weights,
                               const EigensolveOptions& options,
                               std::span<const double> l_tilde = {});

/// phi = phi_hat / l_tilde, phi' = phi_hat * l_tilde, phi_0 scaled to 1, signs fixed.
MarkovEigenbasis detransform(SymmetricEigenpairs pairs, std::span<const double> l_tilde,
                             std::span<const double> weights);

/// max |<phi'_i, phi_j> - delta_ij| under the weights.
double biorthogonality_error(const MarkovEigenbasis& basis);
/// Standard deviation of phi_0 relative to its mean magnitude.
double phi0_relative_sd(const MarkovEigenbasis& basis);

/// u64 n_points, u32 n_eig, f64 lambdas, then phi_hat (n_eig blocks of n_points), l_tilde.
void write_eigenbasis(const MarkovEigenbasis& basis, const std::filesystem::path& path);
/// Rebuilds phi and phi_dual from the stored phi_hat and l_tilde; weights must be supplied.
MarkovEigenbasis read_eigenbasis(const std::filesystem::path& path,
                                 std::span<const double> weights);

}  // namespace vsa
