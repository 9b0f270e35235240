#include "vsa/ks_model.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

#include "fft.hpp"
#include "vsa/error.hpp"

namespace vsa {
namespace {

using cplx = std::complex<double>;

constexpr int kContourPoints = 32;

// Per-mode ETDRK4 coefficients (Cox-Matthews scheme, contour-integral evaluation).
struct Etdrk4Coefficients {
  std::vector<double> e, e2, q, f1, f2, f3;
};

Etdrk4Coefficients etdrk4_coefficients(std::span<const double> linear, double h) {
  const std::size_t K = linear.size();
  Etdrk4Coefficients c;
  for (auto* v : {&c.e, &c.e2, &c.q, &c.f1, &c.f2, &c.f3}) v->assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double hl = h * linear[k];
    c.e[k] = std::exp(hl);
    c.e2[k] = std::exp(hl / 2.0);
    cplx q{}, f1{}, f2{}, f3{};
    for (int j = 1; j <= kContourPoints; ++j) {
      const cplx r = std::polar(1.0, std::numbers::pi * (j - 0.5) / kContourPoints);
      const cplx z = hl + r;
      const cplx ez = std::exp(z);
      const cplx z3 = z * z * z;
      q += (std::exp(z / 2.0) - 1.0) / z;
      f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
      f2 += (2.0 + z + ez * (-2.0 + z)) / z3;
      f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
    }
    c.q[k] = h * (q / double(kContourPoints)).real();
    c.f1[k] = h * (f1 / double(kContourPoints)).real();
    c.f2[k] = h * (f2 / double(kContourPoints)).real();
    c.f3[k] = h * (f3 / double(kContourPoints)).real();
  }
  return c;
}

class KsIntegrator {
 public:
  KsIntegrator(const KsConfig& cfg)
      : S_(cfg.points), fft_(cfg.points), wavenumber_(fft_.bins()), keep_(fft_.bins()),
        u_(S_) {
    std::vector<double> linear(fft_.bins());
    const std::size_t kmax = (S_ - 1) / 2;
    for (std::size_t k = 0; k < fft_.bins(); ++k) {
      const double qk = 2.0 * std::numbers::pi * static_cast<double>(k) / cfg.length;
      wavenumber_[k] = qk;
      linear[k] = qk * qk - qk * qk * qk * qk;
      keep_[k] = 3 * k <= 2 * kmax ? 1.0 : 0.0;
    }
    coeff_ = etdrk4_coefficients(linear, cfg.dt);
  }

  std::vector<cplx> to_spectral(std::span<const double> u) {
    std::vector<cplx> v(fft_.bins());
    fft_.forward(u, v);
    v[0] = 0.0;
    return v;
  }

  void to_physical(std::span<const cplx> v, std::span<double> u) {
    fft_.backward(v, u);
    for (auto& x : u) x /= static_cast<double>(S_);
  }

  // -0.5 i q FFT(u^2), dealiased.
  void nonlinear(std::span<const cplx> v, std::span<cplx> out) {
    to_physical(v, u_);
    for (auto& x : u_) x = x * x;
    fft_.forward(u_, out);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] *= cplx(0.0, -0.5 * wavenumber_[k]) * keep_[k];
    }
  }

  void step(std::vector<cplx>& v) {
    const std::size_t K = v.size();
    std::vector<cplx> nv(K), a(K), na(K), b(K), nb(K), c(K), nc(K);
    nonlinear(v, nv);
    for (std::size_t k = 0; k < K; ++k) a[k] = coeff_.e2[k] * v[k] + coeff_.q[k] * nv[k];
    nonlinear(a, na);
    for (std::size_t k = 0; k < K; ++k) b[k] = coeff_.e2[k] * v[k] + coeff_.q[k] * na[k];
    nonlinear(b, nb);
    for (std::size_t k = 0; k < K; ++k) {
      c[k] = coeff_.e2[k] * a[k] + coeff_.q[k] * (2.0 * nb[k] - nv[k]);
    }
    nonlinear(c, nc);
    for (std::size_t k = 0; k < K; ++k) {
      v[k] = coeff_.e[k] * v[k] + nv[k] * coeff_.f1[k] + 2.0 * (na[k] + nb[k]) * coeff_.f2[k] +
             nc[k] * coeff_.f3[k];
    }
  }

 private:
  std::size_t S_;
  detail::RealFft fft_;
  std::vector<double> wavenumber_;
  std::vector<double> keep_;
  Etdrk4Coefficients coeff_;
  std::vector<double> u_;
};

bool finite_state(std::span<const cplx> v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x);
  return std::isfinite(acc) && acc < 1e200;
}

}  // namespace

void KsConfig::validate() const {
  if (!(length > 0.0)) throw ValidationError("L must be > 0");
  if (points < 8 || points % 2 == 0) throw ValidationError("S must be odd and >= 8");
  if (!(dt > 0.0) || !(tau > 0.0)) throw ValidationError("dt and tau must be > 0");
  const double ratio = tau / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0) {
    throw ValidationError("tau must be a positive integer multiple of dt");
  }
  if (samples < 1) throw ValidationError("N must be >= 1");
  if (!(spinup >= 0.0)) throw ValidationError("spinup must be >= 0");
}

long KsConfig::substeps() const { return std::lround(tau / dt); }

FieldTrajectory integrate_ks(const KsConfig& cfg, std::span<const double> u0) {
  cfg.validate();
  if (u0.size() != cfg.points) {
    throw ValidationError("u0 has " + std::to_string(u0.size()) + " values, expected S = " +
                          std::to_string(cfg.points));
  }
  double mean = 0.0, scale = 1.0;
  for (double x : u0) {
    if (!std::isfinite(x)) throw ValidationError("u0 contains non-finite values");
    mean += x;
    scale = std::max(scale, std::abs(x));
  }
  mean /= static_cast<double>(u0.size());
  if (std::abs(mean) > 1e-12 * scale) {
    throw ValidationError("u0 must have zero spatial mean (mean = " + std::to_string(mean) + ")");
  }

  KsIntegrator ks(cfg);
  auto v = ks.to_spectral(u0);
  const long spin_steps = std::lround(cfg.spinup / cfg.dt);
  const long sub = cfg.substeps();
  long step = 0;
  auto advance = [&](long count) {
    for (long i = 0; i < count; ++i) {
      ks.step(v);
      ++step;
      if (!finite_state(v)) throw BlowupError(step, "non-finite or overflowing KS state");
    }
  };

  advance(spin_steps);
  std::vector<double> data(cfg.samples * cfg.points);
  std::vector<double> u(cfg.points);
  for (std::size_t n = 0; n < cfg.samples; ++n) {
    if (n > 0) advance(sub);
    ks.to_physical(v, u);
    std::copy(u.begin(), u.end(), data.begin() + static_cast<long>(n * cfg.points));
  }
  return FieldTrajectory(cfg.samples, cfg.points, cfg.tau, cfg.length, std::move(data));
}

std::vector<double> ks_initial_state(std::size_t points) {
  if (points < 9) throw ValidationError("ks_initial_state needs S >= 9");
  std::vector<double> u(points, 0.0);
  for (std::size_t s = 0; s < points; ++s) {
    for (int k = 1; k <= 4; ++k) {
      u[s] += 1.2 * std::cos(2.0 * std::numbers::pi * k * static_cast<double>(s) /
                             static_cast<double>(points));
    }
  }
  return u;
}

FieldTrajectory generate_traveling_wave(double alpha, int wavenumber, std::size_t samples,
                                        std::size_t points, double tau, double length) {
  if (wavenumber < 1) throw ValidationError("wavenumber m must be >= 1");
  if (points <= 2 * static_cast<std::size_t>(wavenumber)) {
    throw ValidationError("traveling wave needs S > 2m");
  }
  std::vector<double> data(samples * points);
  for (std::size_t n = 0; n < samples; ++n) {
    for (std::size_t s = 0; s < points; ++s) {
      const double y = length * static_cast<double>(s) / static_cast<double>(points);
      data[n * points + s] = std::cos(2.0 * std::numbers::pi * wavenumber * y / length -
                                      alpha * static_cast<double>(n) * tau);
    }
  }
  return FieldTrajectory(samples, points, tau, length, std::move(data));
}

FieldTrajectory add_noise(const FieldTrajectory& traj, double variance_fraction,
                          std::uint64_t seed) {
  if (!(variance_fraction >= 0.0)) throw ValidationError("variance fraction must be >= 0");
  std::vector<double> data(traj.values().begin(), traj.values().end());
  if (variance_fraction > 0.0) {
    const double sd = std::sqrt(variance_fraction * traj.variance());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sd);
    for (auto& x : data) x += normal(rng);
  }
  return FieldTrajectory(traj.samples(), traj.points(), traj.tau(), traj.length(),
                         std::move(data));
}

}  // namespace vsa
