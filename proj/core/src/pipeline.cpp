#include "vsa/pipeline.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <limits>

#include "vsa/dataset.hpp"
#include "vsa/delay_geometry.hpp"
#include "vsa/error.hpp"

namespace vsa {
namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

SpectralRun spectral_stages(NeighborGraph graph, std::span<const double> weights,
                            std::span<const double> xi, const SpectralConfig& config) {
  const std::size_t n = graph.n;
  if (weights.size() != n || xi.size() != n) {
    throw ValidationError("weights or speed field do not match the graph");
  }
  Stopwatch clock;
  SpectralRun run;
  run.nnz = graph.nnz();
  const auto grid = config.eps_grid.empty() ? default_eps_grid() : config.eps_grid;

  if (!config.epsilon_bar || !config.m_hat) {
    run.unscaled_scan = bandwidth_scan(graph, weights, grid, {}, config.threads);
  }
  run.epsilon_bar = config.epsilon_bar ? *config.epsilon_bar : run.unscaled_scan->eps_star;
  run.m_hat = config.m_hat ? *config.m_hat : run.unscaled_scan->m_hat;
  run.seconds["scan_unscaled"] = clock.lap();

  if (config.use_scaling) {
    auto sigma = density_sigma(graph, weights, run.epsilon_bar, config.threads);
    run.scaling = scaling_field(std::move(sigma), std::vector<double>(xi.begin(), xi.end()),
                                run.m_hat, run.epsilon_bar);
  } else {
    if (!(run.m_hat > 0.0)) throw ValidationError("m_hat must be > 0");
    run.scaling.s.assign(n, 1.0);
    run.scaling.gamma = 1.0 / run.m_hat;
    run.scaling.epsilon_bar = run.epsilon_bar;
  }
  run.seconds["scaling"] = clock.lap();

  run.m_hat_mismatch = std::numeric_limits<double>::quiet_NaN();
  if (!config.epsilon) {
    run.scaled_scan = bandwidth_scan(graph, weights, grid, run.scaling.s, config.threads);
    if (run.unscaled_scan) {
      run.m_hat_mismatch = std::abs(run.scaled_scan->m_hat - run.unscaled_scan->m_hat) /
                           run.unscaled_scan->m_hat;
    }
  }
  run.epsilon = config.epsilon ? *config.epsilon : run.scaled_scan->eps_star;
  run.seconds["scan_scaled"] = clock.lap();

  SparseKernel kernel = scaled_gaussian(std::move(graph), weights, run.scaling.s, run.epsilon);
  if (config.keep_kernel) run.kernel = kernel;
  run.normalizers = markov_normalizers(kernel, config.threads);
  run.row_sum_error = row_stochasticity_error(kernel, run.normalizers, config.threads);
  CsrMatrix p_hat = symmetrize(std::move(kernel), run.normalizers);
  run.seconds["kernel"] = clock.lap();

  EigensolveOptions eo;
  eo.n_eig = std::min(config.n_eig, n);
  eo.tol = config.tol;
  eo.max_iter = config.max_iter;
  eo.seed = config.seed;
  eo.threads = config.threads;
  auto pairs = eigensolve(p_hat, weights, eo, run.normalizers.l_tilde);
  run.basis = detransform(std::move(pairs), run.normalizers.l_tilde, weights);
  run.biorthogonality = biorthogonality_error(run.basis);
  run.phi0_sd = phi0_relative_sd(run.basis);
  run.seconds["eigensolve"] = clock.lap();
  return run;
}

SpectralRun run_vsa(const FieldTrajectory& traj, std::size_t Q, const SpectralConfig& config) {
  Stopwatch clock;
  const AnalysisWindow window = trim_for_delays(traj, Q);
  const auto weights = product_weights(window, uniform_weights(traj.points()));
  const std::size_t k = config.k_nn ? config.k_nn : default_knn(window.size());
  NeighborGraph graph = knn_graph(window, k, config.threads);
  const double t_graph = clock.lap();
  auto xi = phase_speed_xi(window);
  SpectralRun run = spectral_stages(std::move(graph), weights, xi, config);
  run.k_nn = k;
  run.seconds["graph"] = t_graph;
  return run;
}

bool is_granule_shift(const CsrMatrix& a, const CsrMatrix& b, long g) {
  if (a.n != b.n || a.granule != b.granule || a.nnz() != b.nnz()) return false;
  const auto G = static_cast<long>(a.granule);
  const long shift = ((g % G) + G) % G;
  auto map = [&](std::size_t i) {
    const auto t = static_cast<long>(i % a.granule);
    return i - static_cast<std::size_t>(t) + static_cast<std::size_t>((t + shift) % G);
  };
  auto same = [](double x, double y) {
    return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
  };
  for (std::size_t i = 0; i < a.n; ++i) {
    const std::size_t ib = map(i);
    if (a.degree(i) != b.degree(ib) || a.diag_pos[i] != b.diag_pos[ib] ||
        !same(a.diag[i], b.diag[ib])) {
      return false;
    }
    for (std::uint64_t p = 0; p < a.degree(i); ++p) {
      const auto pa = a.row_ptr[i] + p, pb = b.row_ptr[ib] + p;
      if (map(a.col[pa]) != b.col[pb] || !same(a.val[pa], b.val[pb])) return false;
    }
  }
  return true;
}

double subspace_distance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         std::span<const double> w) {
  if (A.rows() != B.rows() || static_cast<std::size_t>(A.rows()) != w.size()) {
    throw ValidationError("subspace_distance: size mismatch");
  }
  Eigen::VectorXd sw(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) sw(i) = std::sqrt(w[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd qa = Eigen::HouseholderQR<Eigen::MatrixXd>(sw.asDiagonal() * A)
                           .householderQ() * Eigen::MatrixXd::Identity(A.rows(), A.cols());
  Eigen::MatrixXd qb = Eigen::HouseholderQR<Eigen::MatrixXd>(sw.asDiagonal() * B)
                           .householderQ() * Eigen::MatrixXd::Identity(B.rows(), B.cols());
  // Norm of the part of span(B) outside span(A); sqrt(1 - cos^2) would floor at 1.5e-8.
  const Eigen::MatrixXd outside = qb - qa * (qa.transpose() * qb);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(outside).singularValues()(0);
}

SymmetryReport symmetry_residual(const FieldTrajectory& traj, std::size_t Q,
                                 SpectralConfig config, long g) {
  config.keep_kernel = true;
  const SpectralRun a = run_vsa(traj, Q, config);
  const SpectralRun b = run_vsa(roll_spatial(traj, g), Q, config);
  SymmetryReport rep;
  rep.eigenvalue_deviation = (a.basis.lambdas - b.basis.lambdas).cwiseAbs().maxCoeff();
  rep.kernel_permuted = is_granule_shift(a.kernel->matrix, b.kernel->matrix, g);

  const auto S = static_cast<long>(traj.points());
  const long shift = ((g % S) + S) % S;
  const auto& la = a.basis.lambdas;
  const Eigen::Index K = la.size(), N = a.basis.phi_hat.rows();
  for (Eigen::Index j = 0; j < K; ++j) {
    const bool left = j == 0 || la(j - 1) - la(j) >= 1e-6;
    const bool right = j + 1 == K || la(j) - la(j + 1) >= 1e-6;
    if (!left || !right) continue;
    Eigen::MatrixXd pa(N, 1), pb(N, 1);
    for (Eigen::Index i = 0; i < N; ++i) {
      const auto s = i % S;
      pa(i - s + (s + shift) % S, 0) = a.basis.phi_hat(i, j);
    }
    pb.col(0) = b.basis.phi_hat.col(j);
    rep.eigenfunction_residual =
        std::max(rep.eigenfunction_residual, subspace_distance(pa, pb, a.basis.weights));
  }
  return rep;
}

}  // namespace vsa
