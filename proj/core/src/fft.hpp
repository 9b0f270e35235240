#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

namespace vsa::detail {

// Unnormalized real <-> half-complex transform of fixed length. Planning goes through a
// global lock (FFTW planners are not reentrant); execution is safe from any thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n), in_(n), out_(n / 2 + 1) {
    std::lock_guard lock(planner_mutex());
    auto* cout = reinterpret_cast<fftw_complex*>(out_.data());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.data(), cout, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), cout, in_.data(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  void forward(std::span<const double> x, std::span<std::complex<double>> X) {
    std::copy(x.begin(), x.end(), in_.begin());
    fftw_execute(forward_);
    std::copy(out_.begin(), out_.end(), X.begin());
  }

  // c2r destroys its input, so the spectrum is staged through an internal buffer.
  void backward(std::span<const std::complex<double>> X, std::span<double> x) {
    std::copy(X.begin(), X.end(), out_.begin());
    fftw_execute(backward_);
    std::copy(in_.begin(), in_.end(), x.begin());
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  std::size_t n_;
  std::vector<double> in_;
  std::vector<std::complex<double>> out_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

}  // namespace vsa::detail
