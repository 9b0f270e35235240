#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vsa/kernels.hpp"
#include "vsa/markov_spectral.hpp"
#include "vsa/sparse.hpp"
#include "vsa/trajectory.hpp"

namespace vsa {

struct SpectralConfig {
  std::size_t k_nn = 0;  // 0: default_knn(points)
  std::size_t n_eig = 51;
  double tol = 1e-10;
  std::size_t max_iter = 0;
  std::uint64_t seed = 0;
  std::vector<double> eps_grid;  // empty: default_eps_grid()
  bool use_scaling = true;       // false: s = 1
  std::optional<double> epsilon_bar;
  std::optional<double> m_hat;
  std::optional<double> epsilon;
  unsigned threads = 0;
  bool keep_kernel = false;  // retain a copy of the scaled kernel
};

struct SpectralRun {
  std::optional<BandwidthScan> unscaled_scan;
  std::optional<BandwidthScan> scaled_scan;
  ScalingField scaling;
  double epsilon_bar = 0.0;
  double epsilon = 0.0;
  double m_hat = 0.0;
  /// |m_hat(scaled) - m_hat(unscaled)| / m_hat(unscaled), NaN when a scan was skipped.
  double m_hat_mismatch = 0.0;
  std::size_t k_nn = 0;
  std::size_t nnz = 0;
  MarkovNormalizers normalizers;
  MarkovEigenbasis basis;
  double row_sum_error = 0.0;
  double biorthogonality = 0.0;
  double phi0_sd = 0.0;
  std::optional<SparseKernel> kernel;
  std::map<std::string, double> seconds;
};

/// Bandwidth tuning, scaled kernel, Markov normalization, eigensolve and detransform on a
/// neighbor graph with point weights `weights` and speed `xi`.
SpectralRun spectral_stages(NeighborGraph graph, std::span<const double> weights,
                            std::span<const double> xi, const SpectralConfig& config);

/// Full VSA on a trajectory with Q delays and uniform spatial weights.
SpectralRun run_vsa(const FieldTrajectory& traj, std::size_t Q, const SpectralConfig& config);

struct SymmetryReport {
  double eigenvalue_deviation = 0.0;
  /// Largest sine of the principal angle between permuted original and shifted-run
  /// eigenfunctions, over indices isolated by a gap of at least 1e-6.
  double eigenfunction_residual = 0.0;
  bool kernel_permuted = false;
};

/// Runs VSA on traj and on traj rolled by g gridpoints and compares them.
SymmetryReport symmetry_residual(const FieldTrajectory& traj, std::size_t Q,
                                 SpectralConfig config, long g);

/// True when b is a bitwise copy of a with every granule index shifted cyclically by g.
bool is_granule_shift(const CsrMatrix& a, const CsrMatrix& b, long g);

/// Largest sine of principal angles between the column spaces of A and B in L2(w).
double subspace_distance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         std::span<const double> w);

}  // namespace vsa
