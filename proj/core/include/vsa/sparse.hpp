#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace vsa {

/// Row-compressed square matrix with an implicit diagonal.
///
/// Points come in granules of G consecutive indices (the S spatial points of one time
/// sample, or G = 1). Row i = (g, t) stores its off-diagonal columns j = (m, u) sorted by
/// the key (m, (u - t) mod G). diag_pos[i] is where the diagonal falls in that order, and
/// every row reduction visits entries in this order, so results commute with a cyclic shift
/// of t.
struct CsrMatrix {
  std::size_t n = 0;
  std::size_t granule = 1;
  std::vector<std::uint64_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;
  std::vector<double> diag;
  std::vector<std::uint32_t> diag_pos;

  std::size_t nnz() const noexcept { return val.size(); }
  std::size_t degree(std::size_t i) const noexcept { return row_ptr[i + 1] - row_ptr[i]; }

  /// Calls fn(j, value) over row i in canonical order, diagonal included.
  template <typename Fn>
  void for_row(std::size_t i, Fn&& fn) const {
    const std::uint64_t b = row_ptr[i], e = row_ptr[i + 1], d = b + diag_pos[i];
    for (std::uint64_t p = b; p < d; ++p) fn(static_cast<std::size_t>(col[p]), val[p]);
    fn(i, diag[i]);
    for (std::uint64_t p = d; p < e; ++p) fn(static_cast<std::size_t>(col[p]), val[p]);
  }

  /// y = M x.
  void multiply(std::span<const double> x, std::span<double> y, unsigned threads = 0) const;
  /// y_i = sum_j M_ij w_j x_j.
  void multiply_weighted(std::span<const double> w, std::span<const double> x,
                         std::span<double> y, unsigned threads = 0) const;

  /// Exact structural and value symmetry (bitwise).
  bool is_symmetric() const;
  /// Dense copy, diagonal included (small instances).
  std::vector<double> to_dense() const;
};

/// Off-diagonal distances between neighbors: val holds d^2 and diag is 0.
using NeighborGraph = CsrMatrix;

/// Streams squared distances in row groups of `granule` rows.
///
/// visit(gb, ge, fn) calls fn(g, rows) for each group g in [gb, ge) in increasing order,
/// where rows[t * n_points + j] / divisor is d^2(g * granule + t, j) (negative values are
/// clamped to 0). It must be callable concurrently on disjoint ranges.
struct DistanceSource {
  std::size_t n_points = 0;
  std::size_t granule = 1;
  double divisor = 1.0;
  /// Preferred alignment of range starts, in groups.
  std::size_t alignment = 1;
  std::function<void(std::size_t, std::size_t,
                     const std::function<void(std::size_t, const double*)>&)>
      visit;
};

/// Exact kNN graph symmetrized by union. Each row keeps its k smallest (d^2, j) pairs in
/// lexicographic order (self excluded), and (i, j) is an edge when either endpoint keeps the
/// other. Output does not depend on the thread count.
NeighborGraph build_knn(const DistanceSource& source, std::size_t k, unsigned threads = 0);

/// Full squared-distance matrix as a source (tests and small problems), granule 1.
DistanceSource dense_source(const std::vector<double>& d2, std::size_t n);

/// Euclidean point cloud, rows of `dim` coordinates.
DistanceSource point_source(const std::vector<double>& points, std::size_t dim);

NeighborGraph knn_graph_from_points(const std::vector<double>& points, std::size_t dim,
                                    std::size_t k, unsigned threads = 0);

/// u64 n_points, then per row u32 degree + (u32 index, f64 d^2) pairs, little-endian.
void write_graph(const NeighborGraph& graph, const std::filesystem::path& path);
NeighborGraph read_graph(const std::filesystem::path& path, std::size_t granule);

/// Recomputes diag_pos from the column order; used after loading or manual assembly.
void index_diagonal(CsrMatrix& m);

}  // namespace vsa
