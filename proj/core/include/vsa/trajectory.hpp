#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vsa {

/// Time-major samples F(x_n)(y_s) of a real scalar field on a uniform periodic grid.
class FieldTrajectory {
 public:
  FieldTrajectory() = default;
  /// `data` holds n_samples * n_points values, time-major. Throws ValidationError on
  /// non-finite values or inconsistent sizes.
  FieldTrajectory(std::size_t n_samples, std::size_t n_points, double tau, double length,
                  std::vector<double> data);

  std::size_t samples() const noexcept { return n_; }
  std::size_t points() const noexcept { return s_; }
  double tau() const noexcept { return tau_; }
  double length() const noexcept { return length_; }

  double operator()(std::size_t n, std::size_t s) const noexcept { return data_[n * s_ + s]; }
  std::span<const double> snapshot(std::size_t n) const noexcept {
    return {data_.data() + n * s_, s_};
  }
  std::span<const double> values() const noexcept { return data_; }

  double grid_point(std::size_t s) const noexcept {
    return length_ * static_cast<double>(s) / static_cast<double>(s_);
  }
  std::vector<double> grid() const;

  /// Population variance over all samples and points.
  double variance() const;

 private:
  std::size_t n_ = 0;
  std::size_t s_ = 0;
  double tau_ = 0.0;
  double length_ = 0.0;
  std::vector<double> data_;
};

/// Circular shift of the spatial index: result(n, (s + shift) mod S) = traj(n, s).
FieldTrajectory roll_spatial(const FieldTrajectory& traj, long shift);

}  // namespace vsa
