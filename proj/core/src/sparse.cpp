#include "vsa/sparse.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <string>
#include <tuple>

#include "vsa/error.hpp"
#include "vsa/parallel.hpp"

namespace vsa {
namespace {

struct Threshold {
  double d = std::numeric_limits<double>::infinity();
  std::uint32_t j = std::numeric_limits<std::uint32_t>::max();
};

inline bool within(double d, std::uint32_t j, const Threshold& t) noexcept {
  return d < t.d || (d == t.d && j <= t.j);
}

// Group ranges whose starts are multiples of the source's alignment.
std::vector<std::pair<std::size_t, std::size_t>> aligned_ranges(std::size_t groups,
                                                                std::size_t align,
                                                                unsigned threads) {
  if (threads == 0) threads = default_threads();
  align = std::max<std::size_t>(align, 1);
  const std::size_t blocks = (groups + align - 1) / align;
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(threads, blocks));
  const std::size_t per = (blocks + chunks - 1) / chunks;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t c = 0; c < chunks; ++c) {
    std::size_t b = std::min(groups, c * per * align), e = std::min(groups, (c + 1) * per * align);
    if (b < e) out.emplace_back(b, e);
  }
  return out;
}

template <typename Fn>
void visit_all(const DistanceSource& src, unsigned threads, Fn&& fn) {
  const auto ranges = aligned_ranges(src.n_points / src.granule, src.alignment, threads);
  parallel_for(ranges.size(), static_cast<unsigned>(ranges.size()),
               [&](std::size_t cb, std::size_t ce) {
                 for (std::size_t c = cb; c < ce; ++c) {
                   src.visit(ranges[c].first, ranges[c].second,
                             [&](std::size_t g, const double* rows) { fn(c, g, rows); });
                 }
               });
}

}  // namespace

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y, unsigned threads) const {
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double acc = 0.0;
      for_row(i, [&](std::size_t j, double v) { acc += v * x[j]; });
      y[i] = acc;
    }
  });
}

void CsrMatrix::multiply_weighted(std::span<const double> w, std::span<const double> x,
                                  std::span<double> y, unsigned threads) const {
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double acc = 0.0;
      for_row(i, [&](std::size_t j, double v) { acc += v * (w[j] * x[j]); });
      y[i] = acc;
    }
  });
}

bool CsrMatrix::is_symmetric() const {
  using Entry = std::tuple<std::uint32_t, std::uint32_t, double>;
  std::vector<Entry> fwd, bwd;
  fwd.reserve(nnz());
  bwd.reserve(nnz());
  for (std::size_t i = 0; i < n; ++i) {
    for (auto p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      fwd.emplace_back(static_cast<std::uint32_t>(i), col[p], val[p]);
      bwd.emplace_back(col[p], static_cast<std::uint32_t>(i), val[p]);
    }
  }
  std::sort(fwd.begin(), fwd.end());
  std::sort(bwd.begin(), bwd.end());
  return fwd == bwd;
}

std::vector<double> CsrMatrix::to_dense() const {
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for_row(i, [&](std::size_t j, double v) { out[i * n + j] = v; });
  }
  return out;
}

void index_diagonal(CsrMatrix& m) {
  m.diag_pos.assign(m.n, 0);
  const std::size_t G = m.granule;
  for (std::size_t i = 0; i < m.n; ++i) {
    std::uint32_t c = 0;
    for (auto p = m.row_ptr[i]; p < m.row_ptr[i + 1]; ++p) {
      if (m.col[p] / G < i / G) ++c;
    }
    m.diag_pos[i] = c;
  }
}

NeighborGraph build_knn(const DistanceSource& src, std::size_t k, unsigned threads) {
  const std::size_t n = src.n_points, G = src.granule;
  if (G == 0 || n % G != 0) throw ValidationError("point count is not a multiple of the granule");
  if (k < 2 || k >= n) {
    throw ValidationError("k_nn = " + std::to_string(k) + " must satisfy 2 <= k_nn < " +
                          std::to_string(n));
  }
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("too many points for 32-bit column indices");
  }
  const double div = src.divisor;
  const auto n32 = static_cast<std::uint32_t>(n);

  // Pass 1: k-th smallest (d, j) per row.
  std::vector<Threshold> thr(n);
  visit_all(src, threads, [&](std::size_t, std::size_t g, const double* rows) {
    thread_local std::vector<std::pair<double, std::uint32_t>> cand;
    for (std::size_t t = 0; t < G; ++t) {
      const std::size_t i = g * G + t;
      const double* row = rows + t * n;
      cand.clear();
      Threshold cut;
      auto shrink = [&] {
        std::nth_element(cand.begin(), cand.begin() + static_cast<long>(k - 1), cand.end());
        cand.resize(k);
        cut = {cand[k - 1].first, cand[k - 1].second};
      };
      for (std::uint32_t j = 0; j < n32; ++j) {
        if (j == i) continue;
        const double d = std::max(row[j], 0.0) / div;
        if (d < cut.d || (d == cut.d && j < cut.j)) {
          cand.emplace_back(d, j);
          if (cand.size() == 2 * k) shrink();
        }
      }
      shrink();
      thr[i] = cut;
    }
  });

  // Pass 2: degrees of the union graph.
  std::vector<std::uint32_t> deg(n, 0);
  visit_all(src, threads, [&](std::size_t, std::size_t g, const double* rows) {
    for (std::size_t t = 0; t < G; ++t) {
      const std::size_t i = g * G + t;
      const double* row = rows + t * n;
      const Threshold ti = thr[i];
      std::uint32_t c = 0;
      for (std::uint32_t j = 0; j < n32; ++j) {
        const double d = std::max(row[j], 0.0) / div;
        if (j != i && (within(d, j, ti) || within(d, static_cast<std::uint32_t>(i), thr[j]))) ++c;
      }
      deg[i] = c;
    }
  });

  NeighborGraph graph;
  graph.n = n;
  graph.granule = G;
  graph.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) graph.row_ptr[i + 1] = graph.row_ptr[i] + deg[i];
  deg = {};
  graph.col.resize(graph.row_ptr[n]);
  graph.val.resize(graph.row_ptr[n]);
  graph.diag.assign(n, 0.0);
  graph.diag_pos.assign(n, 0);

  // Pass 3: fill rows in canonical order.
  visit_all(src, threads, [&](std::size_t, std::size_t g, const double* rows) {
    for (std::size_t t = 0; t < G; ++t) {
      const std::size_t i = g * G + t;
      const double* row = rows + t * n;
      const Threshold ti = thr[i];
      const auto i32 = static_cast<std::uint32_t>(i);
      std::uint64_t pos = graph.row_ptr[i];
      auto consider = [&](std::uint32_t j) {
        const double d = std::max(row[j], 0.0) / div;
        if (within(d, j, ti) || within(d, i32, thr[j])) {
          graph.col[pos] = j;
          graph.val[pos] = d;
          ++pos;
        }
      };
      for (std::size_t m = 0; m < n / G; ++m) {
        const auto base = static_cast<std::uint32_t>(m * G);
        if (m == g) {
          graph.diag_pos[i] = static_cast<std::uint32_t>(pos - graph.row_ptr[i]);
          for (std::size_t u = t + 1; u < G; ++u) consider(base + static_cast<std::uint32_t>(u));
          for (std::size_t u = 0; u < t; ++u) consider(base + static_cast<std::uint32_t>(u));
        } else {
          for (std::size_t u = t; u < G; ++u) consider(base + static_cast<std::uint32_t>(u));
          for (std::size_t u = 0; u < t; ++u) consider(base + static_cast<std::uint32_t>(u));
        }
      }
      if (pos != graph.row_ptr[i + 1]) throw NumericalError("kNN fill pass disagrees with count");
    }
  });
  return graph;
}

DistanceSource dense_source(const std::vector<double>& d2, std::size_t n) {
  if (d2.size() != n * n) throw ValidationError("dense distance matrix has wrong size");
  DistanceSource src;
  src.n_points = n;
  src.visit = [&d2, n](std::size_t gb, std::size_t ge,
                       const std::function<void(std::size_t, const double*)>& fn) {
    for (std::size_t g = gb; g < ge; ++g) fn(g, d2.data() + g * n);
  };
  return src;
}

DistanceSource point_source(const std::vector<double>& points, std::size_t dim) {
  if (dim == 0 || points.size() % dim != 0) throw ValidationError("bad point cloud shape");
  DistanceSource src;
  src.n_points = points.size() / dim;
  src.visit = [&points, dim, n = src.n_points](
                  std::size_t gb, std::size_t ge,
                  const std::function<void(std::size_t, const double*)>& fn) {
    std::vector<double> row(n);
    for (std::size_t g = gb; g < ge; ++g) {
      const double* x = points.data() + g * dim;
      for (std::size_t j = 0; j < n; ++j) {
        const double* y = points.data() + j * dim;
        double acc = 0.0;
        for (std::size_t c = 0; c < dim; ++c) acc += (x[c] - y[c]) * (x[c] - y[c]);
        row[j] = acc;
      }
      fn(g, row.data());
    }
  };
  return src;
}

NeighborGraph knn_graph_from_points(const std::vector<double>& points, std::size_t dim,
                                    std::size_t k, unsigned threads) {
  return build_knn(point_source(points, dim), k, threads);
}

void write_graph(const NeighborGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatError::Code::kIo, "cannot open " + path.string());
  const std::uint64_t n = graph.n;
  out.write(reinterpret_cast<const char*>(&n), 8);
  for (std::size_t i = 0; i < graph.n; ++i) {
    const auto deg = static_cast<std::uint32_t>(graph.degree(i));
    out.write(reinterpret_cast<const char*>(&deg), 4);
    for (auto p = graph.row_ptr[i]; p < graph.row_ptr[i + 1]; ++p) {
      out.write(reinterpret_cast<const char*>(&graph.col[p]), 4);
      out.write(reinterpret_cast<const char*>(&graph.val[p]), 8);
    }
  }
  if (!out) throw FormatError(FormatError::Code::kIo, "write failed for " + path.string());
}

NeighborGraph read_graph(const std::filesystem::path& path, std::size_t granule) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Code::kIo, "cannot open " + path.string());
  auto fail = [&] {
    return FormatError(FormatError::Code::kTruncated, "truncated graph file " + path.string());
  };
  std::uint64_t n = 0;
  if (!in.read(reinterpret_cast<char*>(&n), 8)) throw fail();
  if (granule == 0 || n % granule != 0) {
    throw FormatError(FormatError::Code::kCorrupt, "graph size does not match granule");
  }
  NeighborGraph g;
  g.n = n;
  g.granule = granule;
  g.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t deg = 0;
    if (!in.read(reinterpret_cast<char*>(&deg), 4)) throw fail();
    g.row_ptr[i + 1] = g.row_ptr[i] + deg;
    for (std::uint32_t e = 0; e < deg; ++e) {
      std::uint32_t j = 0;
      double d = 0.0;
      if (!in.read(reinterpret_cast<char*>(&j), 4) || !in.read(reinterpret_cast<char*>(&d), 8)) {
        throw fail();
      }
      if (j >= n) throw FormatError(FormatError::Code::kCorrupt, "column index out of range");
      g.col.push_back(j);
      g.val.push_back(d);
    }
  }
  g.diag.assign(n, 0.0);
  index_diagonal(g);
  return g;
}

}  // namespace vsa
