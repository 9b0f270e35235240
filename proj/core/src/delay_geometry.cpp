#include "vsa/delay_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vsa/error.hpp"

namespace vsa {
namespace {

using Emit = std::function<void(std::size_t, const double*)>;

// Streams slices for window times [gb, ge), starting from the preceding restart slice.
// buf[s * Ne * S + b * S + r] holds Q d^2 between (a, s) and (b, r).
void stream_delay_slices(const AnalysisWindow& win, std::size_t gb, std::size_t ge,
                         const Emit& emit) {
  const FieldTrajectory& x = win.trajectory();
  const std::size_t Q = win.delays(), S = win.points(), Ne = win.n_eff();
  const std::size_t R = restart_period(Q);
  const std::size_t row_len = Ne * S;
  std::vector<double> buf(S * row_len);

  auto direct = [&](std::size_t a, std::size_t s, std::size_t b, double* out) {
    std::fill(out, out + S, 0.0);
    for (std::size_t q = 0; q < Q; ++q) {
      const double xa = x(Q + a - q, s);
      const double* xb = x.snapshot(Q + b - q).data();
      for (std::size_t r = 0; r < S; ++r) {
        const double d = xa - xb[r];
        out[r] += d * d;
      }
    }
  };

  for (std::size_t a = gb - gb % R; a < ge; ++a) {
    for (std::size_t s = 0; s < S; ++s) {
      double* row = buf.data() + s * row_len;
      if (a % R == 0) {
        for (std::size_t b = 0; b < Ne; ++b) direct(a, s, b, row + b * S);
        continue;
      }
      const double xa_new = x(Q + a, s), xa_old = x(a, s);
      for (std::size_t b = Ne - 1; b >= 1; --b) {
        double* out = row + b * S;
        if (b % R == 0) {
          direct(a, s, b, out);
          continue;
        }
        const double* in = row + (b - 1) * S;
        const double* xn = x.snapshot(Q + b).data();
        const double* xo = x.snapshot(b).data();
        for (std::size_t r = 0; r < S; ++r) {
          const double dn = xa_new - xn[r];
          const double dold = xa_old - xo[r];
          out[r] = (in[r] + dn * dn) - dold * dold;
        }
      }
      direct(a, s, 0, row);
    }
    if (a >= gb) emit(a, buf.data());
  }
}

void stream_state_slices(const AnalysisWindow& win, std::span<const double> w, std::size_t gb,
                         std::size_t ge, const Emit& emit) {
  const FieldTrajectory& x = win.trajectory();
  const std::size_t Q = win.delays(), S = win.points(), Ne = win.n_eff();
  const std::size_t R = restart_period(Q);
  std::vector<double> buf(Ne);

  auto d1 = [&](std::size_t ta, std::size_t tb) {
    const double* u = x.snapshot(ta).data();
    const double* v = x.snapshot(tb).data();
    double acc = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const double d = u[s] - v[s];
      acc += w[s] * (d * d);
    }
    return acc;
  };
  auto direct = [&](std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (std::size_t q = 0; q < Q; ++q) acc += d1(Q + a - q, Q + b - q);
    return acc;
  };

  for (std::size_t a = gb - gb % R; a < ge; ++a) {
    if (a % R == 0) {
      for (std::size_t b = 0; b < Ne; ++b) buf[b] = direct(a, b);
    } else {
      for (std::size_t b = Ne - 1; b >= 1; --b) {
        buf[b] = b % R == 0 ? direct(a, b) : (buf[b - 1] + d1(Q + a, Q + b)) - d1(a, b);
      }
      buf[0] = direct(a, 0);
    }
    if (a >= gb) emit(a, buf.data());
  }
}

}  // namespace

std::vector<double> delay_vector(const AnalysisWindow& window, std::size_t n, std::size_t s) {
  const FieldTrajectory& x = window.trajectory();
  if (n < window.first_valid() || n >= x.samples() || s >= x.points()) {
    throw ValidationError("delay_vector index (" + std::to_string(n) + ", " + std::to_string(s) +
                          ") outside the analysis window");
  }
  std::vector<double> out(window.delays());
  for (std::size_t q = 0; q < out.size(); ++q) out[q] = x(n - q, s);
  return out;
}

std::size_t restart_period(std::size_t Q) { return std::max<std::size_t>(64, 4 * Q); }

DistanceSource delay_distance_source(const AnalysisWindow& window) {
  DistanceSource src;
  src.n_points = window.size();
  src.granule = window.points();
  src.divisor = static_cast<double>(window.delays());
  src.alignment = restart_period(window.delays());
  src.visit = [window](std::size_t gb, std::size_t ge, const Emit& emit) {
    stream_delay_slices(window, gb, ge, emit);
  };
  return src;
}

DistanceSource state_distance_source(const AnalysisWindow& window, std::span<const double> w) {
  if (w.size() != window.points()) throw ValidationError("weight count does not match S");
  DistanceSource src;
  src.n_points = window.n_eff();
  src.granule = 1;
  src.divisor = static_cast<double>(window.delays());
  src.alignment = restart_period(window.delays());
  src.visit = [window, weights = std::vector<double>(w.begin(), w.end())](
                  std::size_t gb, std::size_t ge, const Emit& emit) {
    stream_state_slices(window, weights, gb, ge, emit);
  };
  return src;
}

std::vector<double> pairwise_sq_distance_block(const AnalysisWindow& window,
                                               std::size_t row_begin, std::size_t row_end,
                                               std::size_t col_begin, std::size_t col_end) {
  const std::size_t n = window.size(), S = window.points();
  if (row_begin > row_end || row_end > n || col_begin > col_end || col_end > n) {
    throw ValidationError("distance block range outside [0, N_eff*S)");
  }
  const std::size_t cols = col_end - col_begin;
  std::vector<double> out((row_end - row_begin) * cols);
  if (out.empty()) return out;
  const double Q = static_cast<double>(window.delays());
  stream_delay_slices(window, row_begin / S, (row_end - 1) / S + 1,
                      [&](std::size_t a, const double* rows) {
                        for (std::size_t s = 0; s < S; ++s) {
                          const std::size_t i = a * S + s;
                          if (i < row_begin || i >= row_end) continue;
                          const double* row = rows + s * n;
                          double* dst = out.data() + (i - row_begin) * cols;
                          for (std::size_t j = col_begin; j < col_end; ++j) {
                            dst[j - col_begin] = std::max(row[j], 0.0) / Q;
                          }
                        }
                      });
  return out;
}

std::size_t default_knn(std::size_t n_points) {
  const double digits = std::ceil(std::log10(static_cast<double>(std::max<std::size_t>(n_points, 2))));
  return 50 * static_cast<std::size_t>(digits);
}

NeighborGraph knn_graph(const AnalysisWindow& window, std::size_t k, unsigned threads) {
  return build_knn(delay_distance_source(window), k, threads);
}

}  // namespace vsa
