#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <unistd.h>

#include "support/dense_oracle.hpp"
#include "vsa/delay_geometry.hpp"
#include "vsa/error.hpp"
#include "vsa/kernels.hpp"
#include "vsa/markov_spectral.hpp"
#include "vsa/patterns.hpp"

namespace {

using oracle::MatrixXd;
using oracle::VectorXd;

// Complete eigenbasis of a full-graph Gaussian Markov operator on a small random window.
struct Fixture {
  Fixture(std::size_t N, std::size_t S, std::size_t Q, std::size_t n_eig, unsigned seed)
      : traj(oracle::random_trajectory(N, S, seed)), window(vsa::trim_for_delays(traj, Q)) {
    const std::size_t n = window.size();
    const auto w = vsa::uniform_weights(n);
    auto kernel = vsa::unscaled_gaussian(vsa::knn_graph(window, n - 1, 1), w, 2.0);
    const auto [norm, P] = vsa::markov_normalize(kernel);
    const auto p_hat = vsa::symmetrize(std::move(kernel), norm);
    vsa::EigensolveOptions o;
    o.n_eig = n_eig;
    o.threads = 1;
    basis = vsa::detransform(vsa::eigensolve(p_hat, w, o, norm.l_tilde), norm.l_tilde, w);
  }
  vsa::FieldTrajectory traj;
  vsa::AnalysisWindow window;  // refers to traj
  vsa::MarkovEigenbasis basis;
};

// Trajectory whose window values are `field`, keeping the shape and delay count of `like`.
vsa::FieldTrajectory with_window_field(const vsa::AnalysisWindow& like,
                                       std::span<const double> field) {
  const auto& t = like.trajectory();
  std::vector<double> data(t.values().begin(), t.values().end());
  const std::size_t off = like.first_valid() * t.points();
  std::copy(field.begin(), field.end(), data.begin() + long(off));
  return vsa::FieldTrajectory(t.samples(), t.points(), t.tau(), t.length(), std::move(data));
}

TEST(Expansion, CoefficientsOfAnEigenfunction) {
  const Fixture f(20, 3, 2, 54, 1);
  ASSERT_EQ(f.window.size(), 54u);
  const VectorXd phi1 = f.basis.phi.col(1);
  const auto t = with_window_field(f.window, {phi1.data(), std::size_t(phi1.size())});
  const auto win = vsa::trim_for_delays(t, 2);
  const auto c = vsa::expansion_coefficients(f.basis, win);
  for (std::size_t j = 0; j < c.size(); ++j) EXPECT_NEAR(c[j], j == 1 ? 1.0 : 0.0, 1e-8) << j;

  const auto zero = with_window_field(f.window, std::vector<double>(54, 0.0));
  for (double x : vsa::expansion_coefficients(f.basis, vsa::trim_for_delays(zero, 2))) {
    EXPECT_EQ(x, 0.0);
  }
}

TEST(Expansion, MatchesWeightedSum) {
  const Fixture f(20, 3, 2, 6, 2);
  const auto c = vsa::expansion_coefficients(f.basis, f.window);
  const auto field = vsa::window_field(f.window);
  for (Eigen::Index j = 0; j < 6; ++j) {
    double acc = 0.0;
    for (std::size_t nw = 0; nw < f.window.n_eff(); ++nw) {
      for (std::size_t s = 0; s < 3; ++s) {
        const std::size_t i = nw * 3 + s;
        acc += (1.0 / 3.0) * f.basis.phi_dual(Eigen::Index(i), j) * f.traj(nw + 2, s);
        EXPECT_EQ(field[i], f.traj(nw + 2, s));
      }
    }
    acc /= double(f.window.n_eff());
    EXPECT_LE(std::abs(c[std::size_t(j)] - acc), 1e-14 * std::max(1.0, std::abs(acc)));
  }
  const auto other = vsa::trim_for_delays(f.traj, 3);
  EXPECT_THROW(vsa::expansion_coefficients(f.basis, other), vsa::ValidationError);
}

TEST(Reconstruct, FullBasisAndMonotoneError) {
  const Fixture f(20, 3, 2, 54, 3);
  const auto field = vsa::window_field(f.window);
  const auto c = vsa::expansion_coefficients(f.basis, f.window);
  std::vector<std::size_t> sel;
  double norm = 0.0;
  for (double x : field) norm += x * x;
  std::vector<double> errors;
  for (std::size_t j = 0; j < 54; ++j) {
    sel.push_back(j);
    const auto r = vsa::reconstruct(f.basis, c, sel);
    double e = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) e += (r[i] - field[i]) * (r[i] - field[i]);
    errors.push_back(std::sqrt(e / norm));
  }
  EXPECT_LE(errors.back(), 1e-6);

  const std::vector<std::size_t> only0{0};
  const auto r0 = vsa::reconstruct(f.basis, c, only0);
  for (double x : r0) EXPECT_NEAR(x, c[0], 1e-12);

  const std::vector<std::size_t> two{1, 4};
  const auto r2 = vsa::reconstruct(f.basis, c, two);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto I = Eigen::Index(i);
    EXPECT_NEAR(r2[i], c[1] * f.basis.phi(I, 1) + c[4] * f.basis.phi(I, 4), 1e-14);
  }
  const std::vector<std::size_t> bad{60};
  EXPECT_THROW(vsa::reconstruct(f.basis, c, bad), vsa::ValidationError);
}

TEST(Reconstruct, ErrorNonIncreasingInTheOrthonormalRepresentation) {
  // Projection onto the first j orthonormal phi_hat never gets worse as j grows.
  const Fixture f(20, 3, 2, 54, 4);
  const auto field = vsa::window_field(f.window);
  const VectorXd F = Eigen::Map<const VectorXd>(field.data(), Eigen::Index(field.size()));
  const VectorXd w = VectorXd::Constant(F.size(), 1.0 / double(F.size()));
  double prev = 1e300;
  for (Eigen::Index j = 1; j <= 54; ++j) {
    const MatrixXd B = f.basis.phi_hat.leftCols(j);
    const VectorXd proj = B * (B.transpose() * w.cwiseProduct(F));
    const double err = (F - proj).cwiseAbs2().dot(w);
    EXPECT_LE(err, prev + 1e-13);
    prev = err;
  }
  EXPECT_LE(prev, 1e-12);
}

TEST(ExplainedVariance, Extremes) {
  const std::vector<double> F{1.0, -2.0, 0.5, 3.0}, w(4, 0.25);
  const std::vector<double> par{2.0, -4.0, 1.0, 6.0};
  EXPECT_NEAR(vsa::explained_variance(par, F, w), 1.0, 1e-15);
  const std::vector<double> perp{2.0, 1.0, 0.0, 0.0};
  EXPECT_NEAR(vsa::explained_variance(perp, F, w), 0.0, 1e-15);
  const std::vector<double> some{1.0, 1.0, 1.0, 1.0};
  const double v = vsa::explained_variance(some, F, w);
  EXPECT_GE(v, 0.0);
  EXPECT_LE(v, 1.0);
  EXPECT_THROW(vsa::explained_variance(some, std::vector<double>(4, 0.0), w),
               vsa::ValidationError);
}

TEST(PatternSet, VariancesInUnitInterval) {
  const Fixture f(20, 3, 2, 10, 5);
  const auto ps = vsa::pattern_set(f.basis, f.window);
  ASSERT_EQ(ps.variances.size(), 10u);
  for (double v : ps.variances) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  const auto sub = vsa::pattern_set(f.basis, f.window, {2, 5});
  ASSERT_EQ(sub.variances.size(), 2u);
  EXPECT_EQ(sub.variances[1], ps.variances[5]);
}

TEST(LevelSet, MonotoneMapNoiseAndConstant) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  const std::size_t n = 20000;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> F(n), mono(n), noise(n), G(n), mono_g(n);
  for (std::size_t i = 0; i < n; ++i) {
    F[i] = u(rng);
    mono[i] = F[i] * F[i] * F[i];
    noise[i] = g(rng);
    G[i] = g(rng);
    mono_g[i] = std::atan(2.0 * G[i]) + 0.3 * G[i];
  }
  EXPECT_GE(vsa::level_set_concentration(mono, F, 20), 0.95);
  EXPECT_GE(vsa::level_set_concentration(mono_g, G, 20), 0.95);
  EXPECT_LE(vsa::level_set_concentration(noise, F, 20), 0.05);
  EXPECT_EQ(vsa::level_set_concentration(std::vector<double>(n, 2.0), F, 20), 1.0);
  EXPECT_THROW(vsa::level_set_concentration(mono, std::vector<double>(n, 1.0), 20),
               vsa::ValidationError);
  EXPECT_THROW(vsa::level_set_concentration(mono, F, 4), vsa::ValidationError);
}

TEST(LevelSet, TransverseOscillationCount) {
  const std::size_t n = 4000;
  std::vector<double> F(n), c1(n), c2(n), c3(n);
  for (std::size_t i = 0; i < n; ++i) {
    F[i] = -1.0 + 2.0 * double(i) / double(n - 1);
    c1[i] = std::cos(std::numbers::pi * (F[i] + 1.0) / 2.0);
    c2[i] = std::cos(std::numbers::pi * (F[i] + 1.0));
    c3[i] = std::cos(3.0 * std::numbers::pi * (F[i] + 1.0) / 2.0);
  }
  EXPECT_EQ(vsa::transverse_oscillation_count(c1, F), 1u);
  EXPECT_EQ(vsa::transverse_oscillation_count(c2, F), 2u);
  EXPECT_EQ(vsa::transverse_oscillation_count(c3, F), 3u);
}

TEST(FrequencyConcentration, LineSpectrumAndNoise) {
  const std::size_t Ne = 600, S = 9;
  const double tau = 0.25, alpha = 1.3;
  std::vector<double> phi(Ne * S);
  for (std::size_t n = 0; n < Ne; ++n) {
    for (std::size_t s = 0; s < S; ++s) {
      phi[n * S + s] = std::cos(alpha * double(n) * tau + 0.7 * double(s));
    }
  }
  EXPECT_GE(vsa::frequency_concentration(phi, Ne, S, 2), 0.95);
  // Any offset of the line from the bin grid.
  for (double bin = 20.0; bin < 22.0; bin += 0.125) {
    const double a = 2.0 * std::numbers::pi * bin / (double(Ne) * tau);
    std::vector<double> p(Ne * S);
    for (std::size_t n = 0; n < Ne; ++n) {
      for (std::size_t s = 0; s < S; ++s) p[n * S + s] = std::cos(a * double(n) * tau + double(s));
    }
    EXPECT_GE(vsa::frequency_concentration(p, Ne, S, 2), 0.95) << "bin " << bin;
  }
  const double fdom = vsa::dominant_frequency(phi, Ne, S, tau);
  EXPECT_NEAR(fdom, alpha / (2.0 * std::numbers::pi), 1.0 / (double(Ne) * tau));

  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  const std::size_t Nw = 512, Sw = 16;
  std::vector<double> noise(Nw * Sw);
  for (auto& x : noise) x = g(rng);
  EXPECT_LE(vsa::frequency_concentration(noise, Nw, Sw, 4), 0.05);

  EXPECT_THROW(vsa::frequency_concentration(std::vector<double>(63 * 2, 1.0), 63, 2),
               vsa::ValidationError);
}

TEST(Export, CsvLayouts) {
  const Fixture f(20, 3, 2, 4, 8);
  const auto dir = std::filesystem::temp_directory_path();
  const auto pid = std::to_string(::getpid());
  const auto p1 = dir / ("vsa_pat_" + pid + ".csv");
  vsa::export_patterns_csv(f.basis.phi, 1, f.window, p1, "vsa");
  std::ifstream in(p1);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "method,n,t,s,y,phi");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("vsa,2,0.5,0,0,", 0), 0u) << line;
  std::size_t rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, f.window.size());

  const auto p2 = dir / ("vsa_diag_" + pid + ".csv");
  const auto ps = vsa::pattern_set(f.basis, f.window);
  vsa::Diagnostics d;
  d.level_set.assign(4, 0.5);
  d.frequency_concentration.assign(4, 0.25);
  vsa::export_diagnostics_csv(f.basis.lambdas, ps, d, p2);
  std::ifstream in2(p2);
  std::getline(in2, line);
  EXPECT_EQ(line, "j,lambda,variance,level_set,freq_conc");
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

}  // namespace
