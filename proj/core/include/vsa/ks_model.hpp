#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vsa/trajectory.hpp"

namespace vsa {

/// Kuramoto-Sivashinsky run parameters on the periodic domain [0, L).
struct KsConfig {
  double length = 22.0;     // L
  std::size_t points = 65;  // S, odd
  double dt = 0.05;         // integrator step
  double tau = 0.25;        // sampling interval, integer multiple of dt
  std::size_t samples = 1000;
  double spinup = 2500.0;
  std::uint64_t seed = 0;

  /// Throws ValidationError when any invariant fails.
  void validate() const;
  long substeps() const;
};

/// Integrates u_t = -u u_x - u_xx - u_xxxx with a Fourier pseudospectral ETDRK4 scheme
/// (2/3-rule dealiasing of the quadratic term). u0 must have zero spatial mean.
FieldTrajectory integrate_ks(const KsConfig& cfg, std::span<const double> u0);

/// Field with Fourier coefficients k = 1..4 set to 0.6, i.e. sum_k 1.2 cos(2 pi k s / S).
std::vector<double> ks_initial_state(std::size_t points);

/// data[n][s] = cos(2 pi m y_s / L - alpha n tau): a rotation with eigenfrequency alpha.
FieldTrajectory generate_traveling_wave(double alpha, int wavenumber, std::size_t samples,
                                        std::size_t points, double tau, double length);

/// Adds i.i.d. N(0, variance_fraction * var(traj)) noise; deterministic for a given seed.
FieldTrajectory add_noise(const FieldTrajectory& traj, double variance_fraction,
                          std::uint64_t seed);

}  // namespace vsa
