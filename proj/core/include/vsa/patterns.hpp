#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vsa/dataset.hpp"
#include "vsa/markov_spectral.hpp"

namespace vsa {

/// F at every window point, flat (n, s) order.
std::vector<double> window_field(const AnalysisWindow& window);

struct PatternSet {
  std::vector<double> coeffs;
  std::vector<double> variances;
  std::vector<std::size_t> selected;
};

struct Diagnostics {
  std::vector<double> level_set;
  std::vector<double> frequency_concentration;
  std::vector<double> dominant_frequency;  // cycles per time unit
};

/// c_j = sum_i rho_i phi'_j(i) F(i).
std::vector<double> expansion_coefficients(const MarkovEigenbasis& basis,
                                           const AnalysisWindow& window);

/// sum_{j in selected} c_j phi_j.
std::vector<double> reconstruct(const MarkovEigenbasis& basis, std::span<const double> coeffs,
                                std::span<const std::size_t> selected);

/// <F, phi>^2 / (|phi|^2 |F|^2) under the point weights.
double explained_variance(std::span<const double> phi, std::span<const double> field,
                          std::span<const double> weights);

/// Coefficients and explained variances of the given eigenfunctions (all when empty).
PatternSet pattern_set(const MarkovEigenbasis& basis, const AnalysisWindow& window,
                       std::vector<std::size_t> selected = {});

/// 1 - pooled within-bin variance / total variance of phi, bins of equal count by F value.
double level_set_concentration(std::span<const double> phi, std::span<const double> field,
                               std::size_t n_bins = 20);

/// Sign changes of the centered bin means of phi across F-quantile bins; bins whose mean is
/// below 10% of the largest magnitude are skipped.
std::size_t transverse_oscillation_count(std::span<const double> phi,
                                         std::span<const double> field,
                                         std::size_t n_bins = 20);

/// Spectral concentration of n -> phi(n, s): Hann-windowed power spectra averaged over s,
/// pooled over pairs of adjacent bins; share of energy in the top_k pooled bins.
double frequency_concentration(std::span<const double> phi, std::size_t n_eff, std::size_t S,
                               std::size_t top_k = 2);

/// Frequency of the strongest non-zero bin of the averaged spectrum.
double dominant_frequency(std::span<const double> phi, std::size_t n_eff, std::size_t S,
                          double tau);

Diagnostics diagnose(const MarkovEigenbasis& basis, const AnalysisWindow& window,
                     std::size_t n_bins = 20, std::size_t top_k = 2);

/// `n,t,s,y,phi` for eigenfunction j, with an optional leading method column. Rows of phi
/// are window points (N_eff*S) or window times (N_eff, repeated over s).
void export_patterns_csv(const Eigen::MatrixXd& phi, std::size_t j, const AnalysisWindow& window,
                         const std::filesystem::path& path, const std::string& method = "");

/// `j,lambda,variance,level_set,freq_conc`, optional leading method column.
void export_diagnostics_csv(const Eigen::VectorXd& lambdas, const PatternSet& patterns,
                            const Diagnostics& diag, const std::filesystem::path& path,
                            const std::string& method = "");

void export_eigenvalues_csv(const Eigen::VectorXd& lambdas, const std::filesystem::path& path);

}  // namespace vsa
