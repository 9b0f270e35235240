#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "vsa/dataset.hpp"
#include "vsa/pipeline.hpp"
#include "vsa/trajectory.hpp"

namespace vsa {

struct PodResult {
  Eigen::MatrixXd temporal;      // N_eff x n_modes, (1/N_eff) sum_n phi_j^2 = 1
  Eigen::MatrixXd spatial;       // S x n_modes, psi_j(s) = <phi_j, F_s - Fbar_s>
  Eigen::VectorXd eigenvalues;   // all nonzero-rank eigenvalues, descending
  Eigen::VectorXd variances;     // eigenvalues / trace
  std::size_t delays = 1;
};

/// Snapshot POD of the delay-embedded, mean-removed field (Q = 1 for no delays). Solves
/// whichever of the N_eff x N_eff or QS x QS Gram problems is smaller.
PodResult pod_decompose(const FieldTrajectory& traj, std::size_t n_modes, std::size_t Q = 1);

struct NlsaResult {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd phi;       // N_eff x n_modes
  Eigen::MatrixXd phi_dual;  // N_eff x n_modes
  std::vector<double> weights;
  SpectralRun run;
  std::size_t delays = 1;
};

/// Scalar diffusion-maps analysis on delay-embedded states with the VSA scaling recipe.
NlsaResult nlsa_decompose(const FieldTrajectory& traj, std::size_t Q, std::size_t n_modes,
                          SpectralConfig config = {});

/// Delay-window averaged reconstruction from the selected NLSA modes, N_eff x S row-major
/// over window times.
std::vector<double> ssa_reconstruct(const NlsaResult& nlsa, const FieldTrajectory& traj,
                                    std::size_t Q, std::span<const std::size_t> selected);

}  // namespace vsa
