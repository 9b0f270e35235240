#include "vsa/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "vsa/error.hpp"
#include "vsa/parallel.hpp"

namespace vsa {
namespace {

// exp(-t) is exactly 0 in double precision beyond this.
constexpr double kUnderflow = 746.0;

void check_grid(std::span<const double> eps) {
  if (eps.size() < 16) throw ValidationError("bandwidth grid needs at least 16 points");
  for (double e : eps) {
    if (!(e > 0.0) || !std::isfinite(e)) throw ValidationError("bandwidths must be positive");
  }
  const double ratio = eps[1] / eps[0];
  if (!(ratio > 1.0)) throw ValidationError("bandwidth grid must increase");
  for (std::size_t i = 1; i < eps.size(); ++i) {
    if (std::abs(std::log(eps[i] / eps[i - 1]) - std::log(ratio)) > 1e-9 * std::log(ratio)) {
      throw ValidationError("bandwidth grid must be log-spaced");
    }
  }
  if (std::log10(eps.back() / eps.front()) < 10.0 - 1e-12) {
    throw ValidationError("bandwidth grid must span at least 10 decades");
  }
}

}  // namespace

std::vector<double> default_eps_grid() {
  std::vector<double> eps;
  for (int k = -60; k <= 60; ++k) eps.push_back(std::exp2(0.5 * k));
  return eps;
}

BandwidthScan bandwidth_scan(const NeighborGraph& graph, std::span<const double> weights,
                             std::span<const double> eps_grid, std::span<const double> scaling,
                             unsigned threads) {
  check_grid(eps_grid);
  const std::size_t n = graph.n, E = eps_grid.size();
  if (weights.size() != n) throw ValidationError("weights do not match graph size");
  if (!scaling.empty() && scaling.size() != n) throw ValidationError("scaling size mismatch");

  std::vector<double> inv_eps(E);
  for (std::size_t e = 0; e < E; ++e) inv_eps[e] = 1.0 / eps_grid[e];

  std::vector<double> row_terms(n * E);
  bool any_positive = false;
  std::mutex flag_mutex;
  parallel_for(n, threads, [&](std::size_t b, std::size_t e_end) {
    std::vector<double> acc(E);
    bool local_positive = false;
    for (std::size_t i = b; i < e_end; ++i) {
      std::fill(acc.begin(), acc.end(), 0.0);
      graph.for_row(i, [&](std::size_t j, double d2) {
        const double x = scaling.empty() ? d2 : (scaling[i] * scaling[j]) * d2;
        if (x > 0.0) local_positive = true;
        for (std::size_t e = E; e-- > 0;) {
          const double t = x * inv_eps[e];
          if (t > kUnderflow) break;
          acc[e] += std::exp(-t) * weights[j];
        }
      });
      for (std::size_t e = 0; e < E; ++e) row_terms[e * n + i] = weights[i] * acc[e];
    }
    if (local_positive) {
      std::lock_guard lock(flag_mutex);
      any_positive = true;
    }
  });
  if (!any_positive) throw NumericalError("degenerate geometry: all distances are zero");

  BandwidthScan scan;
  scan.epsilons.assign(eps_grid.begin(), eps_grid.end());
  scan.kappa.resize(E);
  for (std::size_t e = 0; e < E; ++e) {
    scan.kappa[e] = order_independent_sum({row_terms.data() + e * n, n});
  }
  row_terms = {};
  scan.dlogk.resize(E);
  for (std::size_t e = 0; e < E; ++e) {
    const std::size_t lo = e == 0 ? 0 : e - 1, hi = e + 1 == E ? e : e + 1;
    scan.dlogk[e] = (std::log(scan.kappa[hi]) - std::log(scan.kappa[lo])) /
                    (std::log(eps_grid[hi]) - std::log(eps_grid[lo]));
  }
  const auto best = std::max_element(scan.dlogk.begin(), scan.dlogk.end());
  scan.max_slope = *best;
  scan.m_hat = 2.0 * scan.max_slope;
  scan.eps_star = eps_grid[static_cast<std::size_t>(best - scan.dlogk.begin())];
  return scan;
}

SparseKernel unscaled_gaussian(NeighborGraph graph, std::span<const double> weights,
                               double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  if (weights.size() != graph.n) throw ValidationError("weights do not match graph size");
  for (double& v : graph.val) v = std::exp(-v / epsilon);
  std::fill(graph.diag.begin(), graph.diag.end(), 1.0);
  return {std::move(graph), std::vector<double>(weights.begin(), weights.end())};
}

SparseKernel scaled_gaussian(NeighborGraph graph, std::span<const double> weights,
                             std::span<const double> s, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  if (weights.size() != graph.n || s.size() != graph.n) {
    throw ValidationError("weights or scaling do not match graph size");
  }
  for (std::size_t i = 0; i < graph.n; ++i) {
    for (auto p = graph.row_ptr[i]; p < graph.row_ptr[i + 1]; ++p) {
      graph.val[p] = std::exp(-((s[i] * s[graph.col[p]]) * graph.val[p]) / epsilon);
    }
  }
  std::fill(graph.diag.begin(), graph.diag.end(), 1.0);
  return {std::move(graph), std::vector<double>(weights.begin(), weights.end())};
}

std::vector<double> density_sigma(const SparseKernel& kernel, unsigned threads) {
  const auto& K = kernel.matrix;
  std::vector<double> sigma(K.n);
  parallel_for(K.n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double acc = 0.0;
      K.for_row(i, [&](std::size_t j, double v) { acc += v * kernel.weights[j]; });
      sigma[i] = acc;
    }
  });
  return sigma;
}

std::vector<double> density_sigma(const NeighborGraph& graph, std::span<const double> weights,
                                  double epsilon, unsigned threads) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  std::vector<double> sigma(graph.n);
  parallel_for(graph.n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double acc = 0.0;
      const std::uint64_t rb = graph.row_ptr[i], re = graph.row_ptr[i + 1];
      const std::uint64_t rd = rb + graph.diag_pos[i];
      for (auto p = rb; p < rd; ++p) acc += std::exp(-graph.val[p] / epsilon) * weights[graph.col[p]];
      acc += 1.0 * weights[i];
      for (auto p = rd; p < re; ++p) acc += std::exp(-graph.val[p] / epsilon) * weights[graph.col[p]];
      sigma[i] = acc;
    }
  });
  return sigma;
}

std::vector<double> phase_speed_xi(const AnalysisWindow& window) {
  const FieldTrajectory& x = window.trajectory();
  const std::size_t Q = window.delays(), S = window.points(), Ne = window.n_eff();
  const double tau = x.tau();
  std::vector<double> xi(Ne * S);
  for (std::size_t nw = 0; nw < Ne; ++nw) {
    for (std::size_t s = 0; s < S; ++s) {
      double acc = 0.0;
      for (std::size_t q = 0; q < Q; ++q) {
        const std::size_t t = Q + nw - q;
        const double zeta = std::abs(x(t, s) - x(t - 1, s)) / tau;
        acc += zeta * zeta;
      }
      xi[nw * S + s] = std::sqrt(acc / static_cast<double>(Q));
    }
  }
  return xi;
}

ScalingField scaling_field(std::vector<double> sigma, std::vector<double> xi, double m_hat,
                           double epsilon_bar) {
  if (!(m_hat > 0.0)) throw ValidationError("m_hat must be > 0");
  if (sigma.size() != xi.size()) throw ValidationError("sigma and xi sizes differ");
  ScalingField f;
  f.gamma = 1.0 / m_hat;
  f.epsilon_bar = epsilon_bar;
  f.s.resize(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw NumericalError("sigma must be positive");
    f.s[i] = std::pow(sigma[i] * xi[i], f.gamma);
  }
  f.sigma = std::move(sigma);
  f.xi = std::move(xi);
  return f;
}

std::vector<double> covariance_kernel(const AnalysisWindow& window) {
  const FieldTrajectory& x = window.trajectory();
  const std::size_t Q = window.delays(), S = window.points(), Ne = window.n_eff();
  const std::size_t n = Ne * S;
  if (n > 10000) {
    throw ValidationError("covariance kernel is dense; N_eff*S = " + std::to_string(n) +
                          " exceeds 1e4");
  }
  std::vector<double> mean(S, 0.0);
  for (std::size_t t = 0; t < x.samples(); ++t) {
    for (std::size_t s = 0; s < S; ++s) mean[s] += x(t, s);
  }
  for (auto& m : mean) m /= static_cast<double>(x.samples());
  // Centered delay vectors, one row of Q values per point.
  std::vector<double> z(n * Q);
  for (std::size_t nw = 0; nw < Ne; ++nw) {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t q = 0; q < Q; ++q) z[(nw * S + s) * Q + q] = window.at(nw, q, s) - mean[s];
    }
  }
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t q = 0; q < Q; ++q) acc += z[i * Q + q] * z[j * Q + q];
      k[i * n + j] = k[j * n + i] = acc / static_cast<double>(Q);
    }
  }
  return k;
}

}  // namespace vsa
