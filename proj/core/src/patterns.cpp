#include "vsa/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <numeric>

#include "fft.hpp"
#include "vsa/error.hpp"

namespace vsa {
namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(FormatError::Code::kIo, "cannot open " + path.string());
  out << std::setprecision(17);
  return out;
}

// Indices sorted by field value, split into n_bins runs of (nearly) equal length.
std::vector<std::vector<std::size_t>> quantile_bins(std::span<const double> field,
                                                    std::size_t n_bins) {
  if (n_bins < 5) throw ValidationError("n_bins must be >= 5");
  if (field.size() < n_bins) throw ValidationError("fewer samples than bins");
  const auto [lo, hi] = std::minmax_element(field.begin(), field.end());
  if (*lo == *hi) throw ValidationError("constant field: level sets are degenerate");
  std::vector<std::size_t> order(field.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return field[a] < field[b]; });
  std::vector<std::vector<std::size_t>> bins(n_bins);
  for (std::size_t k = 0; k < order.size(); ++k) bins[k * n_bins / order.size()].push_back(order[k]);
  return bins;
}

std::vector<double> mean_power_spectrum(std::span<const double> phi, std::size_t n_eff,
                                        std::size_t S) {
  if (phi.size() != n_eff * S) throw ValidationError("pattern size does not match N_eff*S");
  if (n_eff < 64) throw ValidationError("frequency diagnostics need N_eff >= 64");
  detail::RealFft fft(n_eff);
  std::vector<double> hann(n_eff), series(n_eff), power(fft.bins(), 0.0);
  for (std::size_t n = 0; n < n_eff; ++n) {
    hann[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                    static_cast<double>(n_eff)));
  }
  std::vector<std::complex<double>> spec(fft.bins());
  for (std::size_t s = 0; s < S; ++s) {
    double mean = 0.0;
    for (std::size_t n = 0; n < n_eff; ++n) mean += phi[n * S + s];
    mean /= static_cast<double>(n_eff);
    for (std::size_t n = 0; n < n_eff; ++n) series[n] = (phi[n * S + s] - mean) * hann[n];
    fft.forward(series, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) power[k] += std::norm(spec[k]);
  }
  for (auto& p : power) p /= static_cast<double>(S);
  return power;
}

}  // namespace

std::vector<double> window_field(const AnalysisWindow& window) {
  std::vector<double> f(window.size());
  const std::size_t S = window.points();
  for (std::size_t nw = 0; nw < window.n_eff(); ++nw) {
    for (std::size_t s = 0; s < S; ++s) f[nw * S + s] = window.at(nw, 0, s);
  }
  return f;
}

std::vector<double> expansion_coefficients(const MarkovEigenbasis& basis,
                                           const AnalysisWindow& window) {
  const auto f = window_field(window);
  if (static_cast<std::size_t>(basis.phi_dual.rows()) != f.size() ||
      basis.weights.size() != f.size()) {
    throw ValidationError("eigenbasis and analysis window are not aligned");
  }
  std::vector<double> c(static_cast<std::size_t>(basis.phi_dual.cols()), 0.0);
  for (std::size_t j = 0; j < c.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      acc += basis.weights[i] * basis.phi_dual(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(j)) * f[i];
    }
    c[j] = acc;
  }
  return c;
}

std::vector<double> reconstruct(const MarkovEigenbasis& basis, std::span<const double> coeffs,
                                std::span<const std::size_t> selected) {
  const auto n = static_cast<std::size_t>(basis.phi.rows());
  std::vector<double> out(n, 0.0);
  for (std::size_t j : selected) {
    if (j >= static_cast<std::size_t>(basis.phi.cols()) || j >= coeffs.size()) {
      throw ValidationError("selected eigenfunction " + std::to_string(j) + " not computed");
    }
    for (std::size_t i = 0; i < n; ++i) {
      out[i] += coeffs[j] * basis.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

double explained_variance(std::span<const double> phi, std::span<const double> field,
                          std::span<const double> weights) {
  if (phi.size() != field.size() || phi.size() != weights.size()) {
    throw ValidationError("explained_variance: size mismatch");
  }
  double fp = 0.0, pp = 0.0, ff = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    fp += weights[i] * field[i] * phi[i];
    pp += weights[i] * phi[i] * phi[i];
    ff += weights[i] * field[i] * field[i];
  }
  if (!(ff > 0.0)) throw ValidationError("explained variance undefined for a zero field");
  if (!(pp > 0.0)) throw ValidationError("explained variance undefined for a zero pattern");
  return std::clamp(fp * fp / (pp * ff), 0.0, 1.0);
}

PatternSet pattern_set(const MarkovEigenbasis& basis, const AnalysisWindow& window,
                       std::vector<std::size_t> selected) {
  PatternSet ps;
  const auto K = static_cast<std::size_t>(basis.phi.cols());
  if (selected.empty()) {
    selected.resize(K);
    std::iota(selected.begin(), selected.end(), 0);
  }
  ps.coeffs = expansion_coefficients(basis, window);
  const auto f = window_field(window);
  const auto n = static_cast<Eigen::Index>(f.size());
  for (std::size_t j : selected) {
    if (j >= K) throw ValidationError("selected eigenfunction " + std::to_string(j) + " not computed");
    const double* col = basis.phi.col(static_cast<Eigen::Index>(j)).data();
    ps.variances.push_back(explained_variance({col, static_cast<std::size_t>(n)}, f, basis.weights));
  }
  ps.selected = std::move(selected);
  return ps;
}

double level_set_concentration(std::span<const double> phi, std::span<const double> field,
                               std::size_t n_bins) {
  if (phi.size() != field.size()) throw ValidationError("level_set_concentration: size mismatch");
  const auto bins = quantile_bins(field, n_bins);
  const double mean = std::accumulate(phi.begin(), phi.end(), 0.0) / static_cast<double>(phi.size());
  double total = 0.0;
  for (double v : phi) total += (v - mean) * (v - mean);
  if (total <= 1e-300) return 1.0;
  double within = 0.0;
  for (const auto& bin : bins) {
    double m = 0.0;
    for (std::size_t i : bin) m += phi[i];
    m /= static_cast<double>(bin.size());
    for (std::size_t i : bin) within += (phi[i] - m) * (phi[i] - m);
  }
  return std::clamp(1.0 - within / total, 0.0, 1.0);
}

std::size_t transverse_oscillation_count(std::span<const double> phi,
                                         std::span<const double> field, std::size_t n_bins) {
  if (phi.size() != field.size()) throw ValidationError("oscillation count: size mismatch");
  const auto bins = quantile_bins(field, n_bins);
  const double mean = std::accumulate(phi.begin(), phi.end(), 0.0) / static_cast<double>(phi.size());
  std::vector<double> means;
  double biggest = 0.0;
  for (const auto& bin : bins) {
    double m = 0.0;
    for (std::size_t i : bin) m += phi[i];
    means.push_back(m / static_cast<double>(bin.size()) - mean);
    biggest = std::max(biggest, std::abs(means.back()));
  }
  std::size_t changes = 0;
  int last = 0;
  for (double m : means) {
    if (std::abs(m) < 0.1 * biggest) continue;
    const int sign = m > 0.0 ? 1 : -1;
    if (last != 0 && sign != last) ++changes;
    last = sign;
  }
  return changes;
}

double frequency_concentration(std::span<const double> phi, std::size_t n_eff, std::size_t S,
                               std::size_t top_k) {
  const auto power = mean_power_spectrum(phi, n_eff, S);
  // The Hann main lobe spans two FFT bins, so energy is pooled over bin pairs.
  std::vector<double> pooled((power.size() + 1) / 2, 0.0);
  for (std::size_t k = 0; k < power.size(); ++k) pooled[k / 2] += power[k];
  const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
  if (!(total > 0.0)) return 1.0;
  std::sort(pooled.begin(), pooled.end(), std::greater<>());
  const std::size_t take = std::min(top_k, pooled.size());
  const double captured = std::accumulate(pooled.begin(), pooled.begin() + long(take), 0.0);
  return std::clamp(captured / total, 0.0, 1.0);
}

double dominant_frequency(std::span<const double> phi, std::size_t n_eff, std::size_t S,
                          double tau) {
  auto power = mean_power_spectrum(phi, n_eff, S);
  std::size_t best = 1;
  for (std::size_t k = 1; k < power.size(); ++k) {
    if (power[k] > power[best]) best = k;
  }
  return static_cast<double>(best) / (static_cast<double>(n_eff) * tau);
}

Diagnostics diagnose(const MarkovEigenbasis& basis, const AnalysisWindow& window,
                     std::size_t n_bins, std::size_t top_k) {
  Diagnostics d;
  const auto f = window_field(window);
  const std::size_t n = f.size();
  for (Eigen::Index j = 0; j < basis.phi.cols(); ++j) {
    std::span<const double> col(basis.phi.col(j).data(), n);
    d.level_set.push_back(level_set_concentration(col, f, n_bins));
    d.frequency_concentration.push_back(
        frequency_concentration(col, window.n_eff(), window.points(), top_k));
    d.dominant_frequency.push_back(
        dominant_frequency(col, window.n_eff(), window.points(), window.trajectory().tau()));
  }
  return d;
}

void export_patterns_csv(const Eigen::MatrixXd& phi, std::size_t j, const AnalysisWindow& window,
                         const std::filesystem::path& path, const std::string& method) {
  const std::size_t S = window.points();
  const auto& traj = window.trajectory();
  const bool per_point = static_cast<std::size_t>(phi.rows()) == window.size();
  if (!per_point && static_cast<std::size_t>(phi.rows()) != window.n_eff()) {
    throw ValidationError("pattern rows match neither N_eff*S nor N_eff");
  }
  if (j >= static_cast<std::size_t>(phi.cols())) throw ValidationError("pattern index out of range");
  auto out = open_csv(path);
  if (!method.empty()) out << "method,";
  out << "n,t,s,y,phi\n";
  for (std::size_t nw = 0; nw < window.n_eff(); ++nw) {
    const std::size_t n = nw + window.first_valid();
    const double t = static_cast<double>(n) * traj.tau();
    for (std::size_t s = 0; s < S; ++s) {
      const auto row = static_cast<Eigen::Index>(per_point ? nw * S + s : nw);
      if (!method.empty()) out << method << ',';
      out << n << ',' << t << ',' << s << ',' << traj.grid_point(s) << ','
          << phi(row, static_cast<Eigen::Index>(j)) << '\n';
    }
  }
}

void export_diagnostics_csv(const Eigen::VectorXd& lambdas, const PatternSet& patterns,
                            const Diagnostics& diag, const std::filesystem::path& path,
                            const std::string& method) {
  auto out = open_csv(path);
  if (!method.empty()) out << "method,";
  out << "j,lambda,variance,level_set,freq_conc\n";
  for (std::size_t k = 0; k < patterns.selected.size(); ++k) {
    const std::size_t j = patterns.selected[k];
    if (!method.empty()) out << method << ',';
    out << j << ',' << lambdas(static_cast<Eigen::Index>(j)) << ',' << patterns.variances[k] << ','
        << (j < diag.level_set.size() ? diag.level_set[j] : std::nan("")) << ','
        << (j < diag.frequency_concentration.size() ? diag.frequency_concentration[j]
                                                     : std::nan(""))
        << '\n';
  }
}

void export_eigenvalues_csv(const Eigen::VectorXd& lambdas, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "j,lambda\n";
  for (Eigen::Index j = 0; j < lambdas.size(); ++j) out << j << ',' << lambdas(j) << '\n';
}

}  // namespace vsa
