#include "vsa/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vsa/delay_geometry.hpp"
#include "vsa/error.hpp"

namespace vsa {

PodResult pod_decompose(const FieldTrajectory& traj, std::size_t n_modes, std::size_t Q) {
  const AnalysisWindow window = trim_for_delays(traj, Q);
  const std::size_t S = traj.points(), Ne = window.n_eff(), C = Q * S;
  if (n_modes == 0 || n_modes > std::min(Ne, C)) {
    throw ValidationError("n_modes = " + std::to_string(n_modes) + " must be in [1, " +
                          std::to_string(std::min(Ne, C)) + "]");
  }
  const auto w = uniform_weights(S);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S));
  for (std::size_t t = 0; t < traj.samples(); ++t) {
    for (std::size_t s = 0; s < S; ++s) mean(static_cast<Eigen::Index>(s)) += traj(t, s);
  }
  mean /= static_cast<double>(traj.samples());

  Eigen::MatrixXd X(static_cast<Eigen::Index>(Ne), static_cast<Eigen::Index>(C));
  for (std::size_t n = 0; n < Ne; ++n) {
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t s = 0; s < S; ++s) {
        X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q * S + s)) =
            std::sqrt(w[s] / static_cast<double>(Q)) *
            (window.at(n, q, s) - mean(static_cast<Eigen::Index>(s)));
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(Ne);
  const auto M = static_cast<Eigen::Index>(n_modes);

  PodResult res;
  res.delays = Q;
  Eigen::VectorXd lambdas;
  if (Ne <= C) {
    Eigen::MatrixXd cov = (X * X.transpose()) * inv_n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    lambdas = eig.eigenvalues().reverse();
    res.temporal = eig.eigenvectors().rowwise().reverse().leftCols(M) * std::sqrt(double(Ne));
  } else {
    Eigen::MatrixXd gram = (X.transpose() * X) * inv_n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    lambdas = eig.eigenvalues().reverse();
    Eigen::MatrixXd v = eig.eigenvectors().rowwise().reverse().leftCols(M);
    res.temporal = X * v;
    for (Eigen::Index j = 0; j < M; ++j) {
      if (!(lambdas(j) > 0.0)) throw NumericalError("POD mode with zero variance requested");
      res.temporal.col(j) /= std::sqrt(lambdas(j));
    }
  }
  lambdas = lambdas.cwiseMax(0.0);
  const double trace = lambdas.sum();
  if (!(trace > 0.0)) throw ValidationError("POD of a constant field is undefined");
  res.eigenvalues = lambdas;
  res.variances = lambdas / trace;

  // Sign convention: largest-magnitude entry positive.
  for (Eigen::Index j = 0; j < M; ++j) {
    Eigen::Index arg = 0;
    res.temporal.col(j).cwiseAbs().maxCoeff(&arg);
    if (res.temporal(arg, j) < 0.0) res.temporal.col(j) *= -1.0;
  }
  res.spatial.resize(static_cast<Eigen::Index>(S), M);
  for (Eigen::Index j = 0; j < M; ++j) {
    for (std::size_t s = 0; s < S; ++s) {
      double acc = 0.0;
      for (std::size_t n = 0; n < Ne; ++n) {
        acc += res.temporal(static_cast<Eigen::Index>(n), j) *
               (window.at(n, 0, s) - mean(static_cast<Eigen::Index>(s)));
      }
      res.spatial(static_cast<Eigen::Index>(s), j) = acc * inv_n;
    }
  }
  return res;
}

NlsaResult nlsa_decompose(const FieldTrajectory& traj, std::size_t Q, std::size_t n_modes,
                          SpectralConfig config) {
  const AnalysisWindow window = trim_for_delays(traj, Q);
  const std::size_t Ne = window.n_eff(), S = traj.points();
  if (n_modes == 0 || n_modes > Ne) throw ValidationError("n_modes must be in [1, N_eff]");
  const auto w = uniform_weights(S);
  const std::size_t k = config.k_nn ? config.k_nn : default_knn(Ne);
  NeighborGraph graph = build_knn(state_distance_source(window, w), k, config.threads);

  std::vector<double> xi(Ne);
  for (std::size_t nw = 0; nw < Ne; ++nw) {
    double acc = 0.0;
    for (std::size_t q = 0; q < Q; ++q) {
      const std::size_t t = Q + nw - q;
      double inner = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        const double zeta = std::abs(traj(t, s) - traj(t - 1, s)) / traj.tau();
        inner += w[s] * (zeta * zeta);
      }
      acc += inner;
    }
    xi[nw] = std::sqrt(acc / static_cast<double>(Q));
  }
  std::vector<double> rho(Ne, 1.0 / static_cast<double>(Ne));
  config.n_eig = n_modes;
  NlsaResult res;
  res.run = spectral_stages(std::move(graph), rho, xi, config);
  res.run.k_nn = k;
  res.lambdas = res.run.basis.lambdas;
  res.phi = res.run.basis.phi;
  res.phi_dual = res.run.basis.phi_dual;
  res.weights = std::move(rho);
  res.delays = Q;
  return res;
}

std::vector<double> ssa_reconstruct(const NlsaResult& nlsa, const FieldTrajectory& traj,
                                    std::size_t Q, std::span<const std::size_t> selected) {
  const AnalysisWindow window = trim_for_delays(traj, Q);
  const std::size_t Ne = window.n_eff(), S = traj.points();
  if (static_cast<std::size_t>(nlsa.phi.rows()) != Ne || nlsa.delays != Q) {
    throw ValidationError("NLSA result does not match this trajectory and Q");
  }
  std::vector<double> out(Ne * S, 0.0);
  std::vector<double> proj(Q * S);
  for (std::size_t j : selected) {
    if (j >= static_cast<std::size_t>(nlsa.phi.cols())) {
      throw ValidationError("selected mode " + std::to_string(j) + " not computed");
    }
    const auto J = static_cast<Eigen::Index>(j);
    // Projection of each delay channel onto the dual eigenfunction.
    std::fill(proj.begin(), proj.end(), 0.0);
    for (std::size_t n = 0; n < Ne; ++n) {
      const double c = nlsa.weights[n] * nlsa.phi_dual(static_cast<Eigen::Index>(n), J);
      for (std::size_t q = 0; q < Q; ++q) {
        for (std::size_t s = 0; s < S; ++s) proj[q * S + s] += c * window.at(n, q, s);
      }
    }
    for (std::size_t n = 0; n < Ne; ++n) {
      const std::size_t windows = std::min(Q, Ne - n);
      for (std::size_t q = 0; q < windows; ++q) {
        const double p = nlsa.phi(static_cast<Eigen::Index>(n + q), J) / static_cast<double>(windows);
        for (std::size_t s = 0; s < S; ++s) out[n * S + s] += p * proj[q * S + s];
      }
    }
  }
  return out;
}

}  // namespace vsa
