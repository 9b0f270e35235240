#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vsa/dataset.hpp"
#include "vsa/sparse.hpp"

namespace vsa {

/// Kernel values on a neighbor graph plus the rho_NS weight of every point.
struct SparseKernel {
  CsrMatrix matrix;
  std::vector<double> weights;
};

struct BandwidthScan {
  std::vector<double> epsilons;
  std::vector<double> kappa;
  std::vector<double> dlogk;
  double max_slope = 0.0;
  /// Effective dimension, 2 * max_slope: a Gaussian exp(-d^2 / eps) on an m-dimensional set
  /// gives kappa ~ eps^(m/2).
  double m_hat = 0.0;
  double eps_star = 0.0;
};

struct ScalingField {
  std::vector<double> sigma;
  std::vector<double> xi;
  std::vector<double> s;
  double gamma = 1.0;
  double epsilon_bar = 0.0;
};

/// 2^k for k = -30, -29.5, ..., 30.
std::vector<double> default_eps_grid();

/// kappa(eps) = sum over graph entries (diagonal included) of exp(-x_ij / eps) w_i w_j with
/// x_ij = d^2_ij, or s_i s_j d^2_ij when `scaling` is given. Throws on an invalid grid or
/// when every distance is zero.
BandwidthScan bandwidth_scan(const NeighborGraph& graph, std::span<const double> weights,
                             std::span<const double> eps_grid,
                             std::span<const double> scaling = {}, unsigned threads = 0);

/// exp(-d^2 / eps) on graph entries, diagonal 1. Consumes the graph storage.
SparseKernel unscaled_gaussian(NeighborGraph graph, std::span<const double> weights,
                               double epsilon);

/// exp(-(s_i s_j) d^2 / eps) on graph entries, diagonal 1. Consumes the graph storage.
SparseKernel scaled_gaussian(NeighborGraph graph, std::span<const double> weights,
                             std::span<const double> s, double epsilon);

/// sigma = K w for a kernel from unscaled_gaussian.
std::vector<double> density_sigma(const SparseKernel& kernel, unsigned threads = 0);
/// Same values as density_sigma(unscaled_gaussian(graph, w, eps)) without building it.
std::vector<double> density_sigma(const NeighborGraph& graph, std::span<const double> weights,
                                  double epsilon, unsigned threads = 0);

/// Delay-averaged backward-difference speed at every window point (flat order).
std::vector<double> phase_speed_xi(const AnalysisWindow& window);

/// s = (sigma xi)^(1 / m_hat).
ScalingField scaling_field(std::vector<double> sigma, std::vector<double> xi, double m_hat,
                           double epsilon_bar);

/// Dense delay covariance (1/Q) sum_q (F[n-q][s] - Fbar_s)(F[m-q][r] - Fbar_r) over the
/// window, row-major in flat order. Fbar is the time mean over the whole trajectory.
/// Requires N_eff * S <= 1e4.
std::vector<double> covariance_kernel(const AnalysisWindow& window);

}  // namespace vsa
