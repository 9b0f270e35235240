#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "vsa/ks_model.hpp"

namespace ks_ladder {

struct Ladder {
  std::vector<double> dts;
  std::vector<double> errors;  // sup-norm error at the horizon against the fine reference
  std::vector<double> slopes;  // log2 of successive error ratios
};

// Smooth start, horizon 2, steps 0.1 / 0.05 / 0.025 against a reference at 0.025 / 8.
inline Ladder run() {
  const double horizon = 2.0;
  auto solve = [&](double dt) {
    vsa::KsConfig c;
    c.dt = dt;
    c.tau = horizon;
    c.spinup = 0.0;
    c.samples = 2;
    const auto traj = vsa::integrate_ks(c, vsa::ks_initial_state(c.points));
    auto last = traj.snapshot(1);
    return std::vector<double>(last.begin(), last.end());
  };
  Ladder out;
  out.dts = {0.1, 0.05, 0.025};
  const auto ref = solve(0.025 / 8.0);
  for (double dt : out.dts) {
    const auto u = solve(dt);
    double e = 0.0;
    for (std::size_t s = 0; s < u.size(); ++s) e = std::max(e, std::abs(u[s] - ref[s]));
    out.errors.push_back(e);
  }
  for (std::size_t i = 0; i + 1 < out.errors.size(); ++i) {
    out.slopes.push_back(std::log2(out.errors[i] / out.errors[i + 1]));
  }
  return out;
}

}  // namespace ks_ladder
