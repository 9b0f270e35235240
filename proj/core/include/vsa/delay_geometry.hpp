#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vsa/dataset.hpp"
#include "vsa/sparse.hpp"

namespace vsa {

/// (data[n][s], data[n-1][s], ..., data[n-Q+1][s]) for absolute time n >= first_valid.
std::vector<double> delay_vector(const AnalysisWindow& window, std::size_t n, std::size_t s);

/// Interval, in window time steps, at which the sliding-sum recurrence restarts from a
/// direct sum. A pair (a, b) is summed directly when a or b is a multiple of it.
std::size_t restart_period(std::size_t Q);

/// Q * d_Q^2 between window points, streamed one time sample (S rows) at a time.
/// Columns are flat window indices, divisor is Q.
DistanceSource delay_distance_source(const AnalysisWindow& window);

/// Full-field delay distances between window times (one point per time), with spatial
/// quadrature weights w: (1/Q) sum_q sum_s w_s (F[n-q][s] - F[m-q][s])^2.
DistanceSource state_distance_source(const AnalysisWindow& window, std::span<const double> w);

/// d_Q^2 for flat window rows [row_begin, row_end) against columns [col_begin, col_end),
/// row-major. Values are bitwise identical to the streamed ones.
std::vector<double> pairwise_sq_distance_block(const AnalysisWindow& window,
                                               std::size_t row_begin, std::size_t row_end,
                                               std::size_t col_begin, std::size_t col_end);

/// 50 * ceil(log10(n_points)).
std::size_t default_knn(std::size_t n_points);

NeighborGraph knn_graph(const AnalysisWindow& window, std::size_t k, unsigned threads = 0);

}  // namespace vsa
