#include "vsa/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "vsa/error.hpp"
#include "vsa/parallel.hpp"

namespace vsa {

unsigned default_threads() {
  if (const char* env = std::getenv("VSA_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double order_independent_sum(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double acc = 0.0;
  for (double v : sorted) acc += v;
  return acc;
}

FieldTrajectory::FieldTrajectory(std::size_t n_samples, std::size_t n_points, double tau,
                                 double length, std::vector<double> data)
    : n_(n_samples), s_(n_points), tau_(tau), length_(length), data_(std::move(data)) {
  if (n_ < 1 || s_ < 1) throw ValidationError("trajectory needs at least one sample and point");
  if (data_.size() != n_ * s_) {
    throw ValidationError("trajectory data size " + std::to_string(data_.size()) +
                          " does not match N*S = " + std::to_string(n_ * s_));
  }
  if (!(tau_ > 0.0) || !(length_ > 0.0)) throw ValidationError("tau and L must be positive");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw ValidationError("non-finite field value at flat index " + std::to_string(i));
    }
  }
}

std::vector<double> FieldTrajectory::grid() const {
  std::vector<double> y(s_);
  for (std::size_t s = 0; s < s_; ++s) y[s] = grid_point(s);
  return y;
}

double FieldTrajectory::variance() const {
  double mean = 0.0;
  for (double v : data_) mean += v;
  mean /= static_cast<double>(data_.size());
  double var = 0.0;
  for (double v : data_) var += (v - mean) * (v - mean);
  return var / static_cast<double>(data_.size());
}

FieldTrajectory roll_spatial(const FieldTrajectory& traj, long shift) {
  const auto S = static_cast<long>(traj.points());
  long g = ((shift % S) + S) % S;
  std::vector<double> out(traj.values().size());
  for (std::size_t n = 0; n < traj.samples(); ++n) {
    for (long s = 0; s < S; ++s) {
      out[n * S + static_cast<std::size_t>((s + g) % S)] = traj(n, static_cast<std::size_t>(s));
    }
  }
  return FieldTrajectory(traj.samples(), traj.points(), traj.tau(), traj.length(), std::move(out));
}

}  // namespace vsa
