#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "vsa/trajectory.hpp"

namespace vsa {

struct ProductIndex {
  std::size_t n = 0;
  std::size_t s = 0;
};

inline std::size_t flatten(ProductIndex p, std::size_t S) noexcept { return p.n * S + p.s; }
inline ProductIndex unflatten(std::size_t i, std::size_t S) noexcept { return {i / S, i % S}; }

/// Spatial quadrature weights, summing to one.
using QuadratureWeights = std::vector<double>;

QuadratureWeights uniform_weights(std::size_t S);

/// Times [Q, N) of a trajectory: each has Q delays plus one backward difference available.
/// Window indices n_w = n - first_valid run over [0, n_eff). The trajectory must outlive it.
class AnalysisWindow {
 public:
  AnalysisWindow(const FieldTrajectory& traj, std::size_t Q);

  const FieldTrajectory& trajectory() const noexcept { return *traj_; }
  std::size_t delays() const noexcept { return q_; }
  std::size_t first_valid() const noexcept { return q_; }
  std::size_t n_eff() const noexcept { return traj_->samples() - q_; }
  std::size_t points() const noexcept { return traj_->points(); }
  std::size_t size() const noexcept { return n_eff() * points(); }

  /// Value at window time nw and delay q, i.e. data[first_valid + nw - q][s].
  double at(std::size_t nw, std::size_t q, std::size_t s) const noexcept {
    return (*traj_)(q_ + nw - q, s);
  }

 private:
  const FieldTrajectory* traj_;
  std::size_t q_;
};

AnalysisWindow trim_for_delays(const FieldTrajectory& traj, std::size_t Q);

/// rho_NS weight of each window point, w_s / N_eff, flat (n, s) order.
std::vector<double> product_weights(const AnalysisWindow& window, std::span<const double> w);

void write_dataset(const FieldTrajectory& traj, const std::filesystem::path& path);
FieldTrajectory read_dataset(const std::filesystem::path& path);

/// CSV with header `t,y,value`, 17 significant digits.
void export_csv(const FieldTrajectory& traj, const std::filesystem::path& path);

inline constexpr std::size_t kDatasetHeaderBytes = 40;

}  // namespace vsa
