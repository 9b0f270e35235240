#include "vsa/markov_spectral.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "vsa/error.hpp"
#include "vsa/lanczos.hpp"
#include "vsa/parallel.hpp"

namespace vsa {

MarkovNormalizers markov_normalizers(const SparseKernel& kernel, unsigned threads) {
  const CsrMatrix& K = kernel.matrix;
  const auto& w = kernel.weights;
  if (w.size() != K.n) throw ValidationError("kernel weights do not match its size");
  MarkovNormalizers norm;
  norm.r.resize(K.n);
  norm.l.resize(K.n);
  for (std::size_t i = 0; i < K.n; ++i) {
    if (K.n > 1 && K.degree(i) == 0) {
      throw NumericalError("disconnected point at flat index " + std::to_string(i));
    }
  }
  parallel_for(K.n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double acc = 0.0;
      K.for_row(i, [&](std::size_t j, double v) { acc += v * w[j]; });
      if (!(acc > 0.0) || !std::isfinite(acc)) {
        throw NumericalError("disconnected point at flat index " + std::to_string(i));
      }
      norm.r[i] = acc;
    }
  });
  std::vector<double> u(K.n);
  for (std::size_t j = 0; j < K.n; ++j) u[j] = w[j] / norm.r[j];
  parallel_for(K.n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double acc = 0.0;
      K.for_row(i, [&](std::size_t j, double v) { acc += v * u[j]; });
      norm.l[i] = acc;
    }
  });
  norm.l_hat.resize(K.n);
  norm.l_tilde.resize(K.n);
  for (std::size_t i = 0; i < K.n; ++i) {
    norm.l_hat[i] = std::sqrt(norm.l[i] * norm.r[i]);
    norm.l_tilde[i] = std::sqrt(norm.l[i] / norm.r[i]);
  }
  return norm;
}

std::pair<MarkovNormalizers, CsrMatrix> markov_normalize(const SparseKernel& kernel,
                                                         unsigned threads) {
  auto norm = markov_normalizers(kernel, threads);
  CsrMatrix P = kernel.matrix;
  for (std::size_t i = 0; i < P.n; ++i) {
    for (auto p = P.row_ptr[i]; p < P.row_ptr[i + 1]; ++p) {
      P.val[p] = P.val[p] / (norm.l[i] * norm.r[P.col[p]]);
    }
    P.diag[i] = P.diag[i] / (norm.l[i] * norm.r[i]);
  }
  return {std::move(norm), std::move(P)};
}

double row_stochasticity_error(const SparseKernel& kernel, const MarkovNormalizers& norm,
                               unsigned threads) {
  const CsrMatrix& K = kernel.matrix;
  std::vector<double> dev(K.n);
  parallel_for(K.n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double acc = 0.0;
      K.for_row(i, [&](std::size_t j, double v) {
        acc += (v / (norm.l[i] * norm.r[j])) * kernel.weights[j];
      });
      dev[i] = std::abs(acc - 1.0);
    }
  });
  double worst = 0.0;
  for (double d : dev) worst = std::max(worst, d);
  return worst;
}

CsrMatrix symmetrize(SparseKernel&& kernel, const MarkovNormalizers& norm) {
  CsrMatrix P = std::move(kernel.matrix);
  const auto& lh = norm.l_hat;
  for (std::size_t i = 0; i < P.n; ++i) {
    for (auto p = P.row_ptr[i]; p < P.row_ptr[i + 1]; ++p) {
      P.val[p] = P.val[p] / (lh[i] * lh[P.col[p]]);
    }
    P.diag[i] = P.diag[i] / (lh[i] * lh[i]);
  }
  return P;
}

SymmetricEigenpairs eigensolve(const CsrMatrix& p_hat, std::span<const double> weights,
                               const EigensolveOptions& opt, std::span<const double> l_tilde) {
  const std::size_t n = p_hat.n;
  if (weights.size() != n) throw ValidationError("weights do not match operator size");
  if (opt.n_eig == 0 || opt.n_eig > n) {
    throw ValidationError("n_eig = " + std::to_string(opt.n_eig) + " must be in [1, " +
                          std::to_string(n) + "]");
  }
  Eigen::VectorXd sqrt_w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weights[i] > 0.0)) throw ValidationError("weights must be positive");
    sqrt_w(static_cast<Eigen::Index>(i)) = std::sqrt(weights[i]);
  }
  std::vector<double> tmp(n), out(n);
  LinearOperator apply = [&](const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = sqrt_w(static_cast<Eigen::Index>(i)) * x[i];
    p_hat.multiply(tmp, out, opt.threads);
    for (std::size_t i = 0; i < n; ++i) y[i] = sqrt_w(static_cast<Eigen::Index>(i)) * out[i];
  };

  SymmetricEigenpairs res;
  const auto N = static_cast<Eigen::Index>(n);
  const auto K = static_cast<Eigen::Index>(opt.n_eig);
  Eigen::MatrixXd vecs(N, K);
  res.lambdas.resize(K);
  res.residuals.resize(K);
  Eigen::Index first = 0;
  Eigen::MatrixXd locked;
  if (opt.lock_top) {
    if (l_tilde.size() != n) throw ValidationError("locking the top pair needs l_tilde");
    Eigen::VectorXd v0(N);
    for (Eigen::Index i = 0; i < N; ++i) v0(i) = sqrt_w(i) * l_tilde[static_cast<std::size_t>(i)];
    v0.normalize();
    Eigen::VectorXd av(N);
    apply(v0.data(), av.data());
    res.lambdas(0) = v0.dot(av);
    res.residuals(0) = (av - res.lambdas(0) * v0).norm();
    vecs.col(0) = v0;
    locked = v0;
    first = 1;
  }
  if (K > first) {
    LanczosOptions lo;
    lo.n_eig = opt.n_eig - static_cast<std::size_t>(first);
    lo.tol = opt.tol;
    lo.max_iter = opt.max_iter;
    lo.seed = opt.seed;
    auto lr = lanczos_largest(n, apply, lo, first ? &locked : nullptr);
    res.lambdas.tail(K - first) = lr.values;
    res.residuals.tail(K - first) = lr.residuals;
    vecs.rightCols(K - first) = lr.vectors;
  }
  for (Eigen::Index i = 0; i < N; ++i) vecs.row(i) /= sqrt_w(i);
  res.phi_hat = std::move(vecs);
  return res;
}

MarkovEigenbasis detransform(SymmetricEigenpairs pairs, std::span<const double> l_tilde,
                             std::span<const double> weights) {
  const auto N = pairs.phi_hat.rows(), K = pairs.phi_hat.cols();
  if (static_cast<std::size_t>(N) != l_tilde.size() ||
      static_cast<std::size_t>(N) != weights.size()) {
    throw ValidationError("eigenvectors, l_tilde and weights sizes differ");
  }
  MarkovEigenbasis b;
  b.lambdas = std::move(pairs.lambdas);
  b.residuals = std::move(pairs.residuals);
  b.phi_hat = std::move(pairs.phi_hat);
  for (Eigen::Index j = 0; j < K; ++j) {
    Eigen::Index arg = 0;
    b.phi_hat.col(j).cwiseAbs().maxCoeff(&arg);
    if (b.phi_hat(arg, j) < 0.0) b.phi_hat.col(j) *= -1.0;
  }
  b.phi.resize(N, K);
  b.phi_dual.resize(N, K);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double lt = l_tilde[static_cast<std::size_t>(i)];
    b.phi.row(i) = b.phi_hat.row(i) / lt;
    b.phi_dual.row(i) = b.phi_hat.row(i) * lt;
  }
  if (K > 0) {
    double mean = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) mean += weights[static_cast<std::size_t>(i)] * b.phi(i, 0);
    if (mean != 0.0) {
      b.phi.col(0) /= mean;
      b.phi_dual.col(0) *= mean;
    }
  }
  for (Eigen::Index j = 0; j + 1 < K; ++j) {
    if (std::abs(b.lambdas(j) - b.lambdas(j + 1)) < 1e-8) {
      b.near_degenerate.push_back(static_cast<std::size_t>(j));
    }
  }
  b.l_tilde.assign(l_tilde.begin(), l_tilde.end());
  b.weights.assign(weights.begin(), weights.end());
  return b;
}

double biorthogonality_error(const MarkovEigenbasis& b) {
  Eigen::Map<const Eigen::VectorXd> w(b.weights.data(), static_cast<Eigen::Index>(b.weights.size()));
  Eigen::MatrixXd G = b.phi_dual.transpose() * w.asDiagonal() * b.phi;
  G -= Eigen::MatrixXd::Identity(G.rows(), G.cols());
  return G.cwiseAbs().maxCoeff();
}

double phi0_relative_sd(const MarkovEigenbasis& b) {
  const auto& c = b.phi.col(0);
  const double mean = c.mean();
  const double sd = std::sqrt((c.array() - mean).square().mean());
  return sd / std::abs(mean);
}

void write_eigenbasis(const MarkovEigenbasis& b, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatError::Code::kIo, "cannot open " + path.string());
  const std::uint64_t n = static_cast<std::uint64_t>(b.phi_hat.rows());
  const std::uint32_t k = static_cast<std::uint32_t>(b.phi_hat.cols());
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&k), 4);
  out.write(reinterpret_cast<const char*>(b.lambdas.data()), static_cast<std::streamsize>(k * 8));
  out.write(reinterpret_cast<const char*>(b.phi_hat.data()),
            static_cast<std::streamsize>(n * k * 8));
  out.write(reinterpret_cast<const char*>(b.l_tilde.data()), static_cast<std::streamsize>(n * 8));
  if (!out) throw FormatError(FormatError::Code::kIo, "write failed for " + path.string());
}

MarkovEigenbasis read_eigenbasis(const std::filesystem::path& path,
                                 std::span<const double> weights) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Code::kIo, "cannot open " + path.string());
  std::uint64_t n = 0;
  std::uint32_t k = 0;
  auto need = [&](char* p, std::size_t bytes) {
    if (!in.read(p, static_cast<std::streamsize>(bytes))) {
      throw FormatError(FormatError::Code::kTruncated, "truncated eigenbasis " + path.string());
    }
  };
  need(reinterpret_cast<char*>(&n), 8);
  need(reinterpret_cast<char*>(&k), 4);
  if (n != weights.size()) throw ValidationError("weights do not match stored eigenbasis");
  SymmetricEigenpairs pairs;
  pairs.lambdas.resize(k);
  pairs.phi_hat.resize(static_cast<Eigen::Index>(n), k);
  pairs.residuals = Eigen::VectorXd::Zero(k);
  std::vector<double> lt(n);
  need(reinterpret_cast<char*>(pairs.lambdas.data()), k * 8);
  need(reinterpret_cast<char*>(pairs.phi_hat.data()), n * k * 8);
  need(reinterpret_cast<char*>(lt.data()), n * 8);
  return detransform(std::move(pairs), lt, weights);
}

}  // namespace vsa
