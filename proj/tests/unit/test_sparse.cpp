#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <unistd.h>

#include "support/dense_oracle.hpp"
#include "vsa/delay_geometry.hpp"
#include "vsa/error.hpp"
#include "vsa/pipeline.hpp"
#include "vsa/sparse.hpp"

namespace {

std::vector<double> random_points(std::size_t n, std::size_t dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> p(n * dim);
  for (auto& x : p) x = g(rng);
  return p;
}

// Brute force: per-row k smallest (d, j) with j != i, then union.
std::vector<std::set<std::size_t>> brute_knn(const std::vector<double>& d2, std::size_t n,
                                             std::size_t k) {
  std::vector<std::set<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> row;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.emplace_back(d2[i * n + j], j);
    }
    std::sort(row.begin(), row.end());
    for (std::size_t r = 0; r < k; ++r) {
      nb[i].insert(row[r].second);
      nb[row[r].second].insert(i);
    }
  }
  return nb;
}

std::vector<double> pairwise(const std::vector<double>& p, std::size_t dim) {
  const std::size_t n = p.size() / dim;
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        acc += (p[i * dim + c] - p[j * dim + c]) * (p[i * dim + c] - p[j * dim + c]);
      }
      d[i * n + j] = acc;
    }
  }
  return d;
}

TEST(Knn, MatchesBruteForceOnRandomCloud) {
  const std::size_t n = 50, dim = 3;
  const auto pts = random_points(n, dim, 1);
  const auto d2 = pairwise(pts, dim);
  for (std::size_t k : {2u, 5u, 17u}) {
    const auto g = vsa::knn_graph_from_points(pts, dim, k, 1);
    const auto ref = brute_knn(d2, n, k);
    ASSERT_EQ(g.n, n);
    for (std::size_t i = 0; i < n; ++i) {
      std::set<std::size_t> got;
      for (auto p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p) {
        got.insert(g.col[p]);
        EXPECT_EQ(g.val[p], d2[i * n + g.col[p]]);
      }
      EXPECT_EQ(got, ref[i]) << "row " << i << " k " << k;
      EXPECT_EQ(g.diag[i], 0.0);
    }
    EXPECT_TRUE(g.is_symmetric());
  }
}

TEST(Knn, TiesBreakBySmallerIndex) {
  // Point 0 is at distance 1 from the others, which are mutually at distance 5. With k = 2
  // rows 2 and 3 each face a tie at 5 and keep the smaller index, so 2-3 is not an edge.
  const std::vector<double> d2{0, 1, 1, 1, 1, 0, 5, 5, 1, 5, 0, 5, 1, 5, 5, 0};
  const auto g = vsa::build_knn(vsa::dense_source(d2, 4), 2, 1);
  auto row = [&](std::size_t i) {
    return std::set<std::size_t>(g.col.begin() + long(g.row_ptr[i]),
                                 g.col.begin() + long(g.row_ptr[i + 1]));
  };
  EXPECT_EQ(row(0), (std::set<std::size_t>{1, 2, 3}));
  EXPECT_EQ(row(1), (std::set<std::size_t>{0, 2, 3}));
  EXPECT_EQ(row(2), (std::set<std::size_t>{0, 1}));
  EXPECT_EQ(row(3), (std::set<std::size_t>{0, 1}));
}

TEST(Knn, CollinearMiddlePointSeesBothEnds) {
  const std::vector<double> pts{0.0, 1.0, 3.0};
  const auto g = vsa::knn_graph_from_points(pts, 1, 2, 1);
  std::set<std::size_t> mid;
  for (auto p = g.row_ptr[1]; p < g.row_ptr[2]; ++p) mid.insert(g.col[p]);
  EXPECT_EQ(mid, (std::set<std::size_t>{0, 2}));
}

TEST(Knn, UnionAddsReverseEdges) {
  // A far outlier keeps its nearest cluster point, which does not keep it back.
  const std::vector<double> pts{0.0, 0.1, 0.2, 0.3, 10.0};
  const auto g = vsa::knn_graph_from_points(pts, 1, 2, 1);
  bool has = false;
  for (auto p = g.row_ptr[3]; p < g.row_ptr[4]; ++p) has |= g.col[p] == 4;
  EXPECT_TRUE(has);
  EXPECT_TRUE(g.is_symmetric());
}

TEST(Knn, ValidatesK) {
  const auto pts = random_points(10, 2, 2);
  EXPECT_THROW(vsa::knn_graph_from_points(pts, 2, 1), vsa::ValidationError);
  EXPECT_THROW(vsa::knn_graph_from_points(pts, 2, 10), vsa::ValidationError);
  EXPECT_NO_THROW(vsa::knn_graph_from_points(pts, 2, 9));
}

TEST(Knn, DelayGraphIndependentOfThreadsAndMatchesDense) {
  const auto t = oracle::random_trajectory(140, 3, 3);
  const auto win = vsa::trim_for_delays(t, 4);
  const std::size_t n = win.size(), k = 12;
  const auto a = vsa::knn_graph(win, k, 1);
  const auto b = vsa::knn_graph(win, k, 3);
  EXPECT_EQ(a.row_ptr, b.row_ptr);
  EXPECT_EQ(a.col, b.col);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.diag_pos, b.diag_pos);

  const auto d = vsa::pairwise_sq_distance_block(win, 0, n, 0, n);
  const auto ref = brute_knn(d, n, k);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::size_t> got(a.col.begin() + long(a.row_ptr[i]), a.col.begin() + long(a.row_ptr[i + 1]));
    EXPECT_EQ(got, ref[i]);
  }
}

TEST(Knn, CanonicalOrderCommutesWithRoll) {
  const auto t = oracle::random_trajectory(100, 5, 4);
  for (long g : {1L, 3L, -2L}) {
    const auto a = vsa::knn_graph(vsa::trim_for_delays(t, 3), 9, 1);
    const auto rolled = vsa::roll_spatial(t, g);
    const auto b = vsa::knn_graph(vsa::trim_for_delays(rolled, 3), 9, 1);
    EXPECT_TRUE(vsa::is_granule_shift(a, b, g)) << "g=" << g;
  }
}

TEST(CsrMatrix, MultiplyMatchesDense) {
  const auto pts = random_points(30, 2, 5);
  auto g = vsa::knn_graph_from_points(pts, 2, 4, 1);
  for (std::size_t i = 0; i < g.n; ++i) g.diag[i] = 1.0 + double(i);
  const auto dense = g.to_dense();
  std::vector<double> x(g.n), w(g.n), y(g.n), yw(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    x[i] = std::sin(double(i));
    w[i] = 1.0 / (1.0 + double(i));
  }
  g.multiply(x, y, 2);
  g.multiply_weighted(w, x, yw, 1);
  for (std::size_t i = 0; i < g.n; ++i) {
    double r = 0.0, rw = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      r += dense[i * g.n + j] * x[j];
      rw += dense[i * g.n + j] * w[j] * x[j];
    }
    EXPECT_NEAR(y[i], r, 1e-12);
    EXPECT_NEAR(yw[i], rw, 1e-12);
  }
}

TEST(GraphIo, RoundTrip) {
  const auto t = oracle::random_trajectory(60, 4, 6);
  const auto g = vsa::knn_graph(vsa::trim_for_delays(t, 2), 6, 1);
  const auto path = std::filesystem::temp_directory_path() /
                    ("vsa_graph_" + std::to_string(::getpid()) + ".bin");
  vsa::write_graph(g, path);
  const auto h = vsa::read_graph(path, 4);
  EXPECT_EQ(g.row_ptr, h.row_ptr);
  EXPECT_EQ(g.col, h.col);
  EXPECT_EQ(g.val, h.val);
  EXPECT_EQ(g.diag_pos, h.diag_pos);
  EXPECT_THROW(vsa::read_graph(path, 7), vsa::FormatError);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
  EXPECT_THROW(vsa::read_graph(path, 4), vsa::FormatError);
  std::filesystem::remove(path);
}

}  // namespace
