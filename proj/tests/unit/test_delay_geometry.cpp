#include <gtest/gtest.h>

#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "support/dense_oracle.hpp"
#include "vsa/delay_geometry.hpp"
#include "vsa/error.hpp"
#include "vsa/ks_model.hpp"

namespace {

std::vector<double> collect(const vsa::DistanceSource& src, std::size_t gb, std::size_t ge) {
  const std::size_t G = src.granule, n = src.n_points;
  std::vector<double> out((ge - gb) * G * n);
  src.visit(gb, ge, [&](std::size_t g, const double* rows) {
    for (std::size_t t = 0; t < G; ++t) {
      for (std::size_t j = 0; j < n; ++j) {
        out[((g - gb) * G + t) * n + j] = std::max(rows[t * n + j], 0.0) / src.divisor;
      }
    }
  });
  return out;
}

TEST(DelayVector, Definitions) {
  const auto t = oracle::random_trajectory(12, 3, 1);
  const auto w1 = vsa::trim_for_delays(t, 1);
  EXPECT_EQ(vsa::delay_vector(w1, 5, 2), std::vector<double>{t(5, 2)});

  const auto w4 = vsa::trim_for_delays(t, 4);
  const auto v = vsa::delay_vector(w4, 7, 1);
  ASSERT_EQ(v.size(), 4u);
  for (std::size_t q = 0; q < 4; ++q) EXPECT_EQ(v[q], t(7 - q, 1));
  EXPECT_THROW(vsa::delay_vector(w4, 3, 0), vsa::ValidationError);
  EXPECT_THROW(vsa::delay_vector(w4, 12, 0), vsa::ValidationError);

  const vsa::FieldTrajectory c(6, 1, 0.1, 1.0, std::vector<double>(6, 2.5));
  EXPECT_EQ(vsa::delay_vector(vsa::trim_for_delays(c, 3), 4, 0), std::vector<double>(3, 2.5));
}

TEST(DelayVector, TravelingWaveClosedForm) {
  const double alpha = 0.3, tau = 0.25, L = 10.0;
  const std::size_t S = 8;
  const auto t = vsa::generate_traveling_wave(alpha, 1, 20, S, tau, L);
  const auto win = vsa::trim_for_delays(t, 5);
  const auto v = vsa::delay_vector(win, 9, 3);
  for (std::size_t q = 0; q < 5; ++q) {
    const double y = L * 3.0 / double(S);
    EXPECT_NEAR(v[q], std::cos(2.0 * std::numbers::pi * y / L - alpha * double(9 - q) * tau),
                1e-15);
  }
}

TEST(PairwiseDistance, SmallInstanceMatchesDirectSum) {
  const auto t = oracle::random_trajectory(6, 4, 2);
  const std::size_t Q = 3;
  const auto win = vsa::trim_for_delays(t, Q);
  const auto ref = oracle::delay_sq_distances(t, Q);
  const std::size_t n = win.size();
  const auto block = vsa::pairwise_sq_distance_block(win, 0, n, 0, n);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(block[i * n + i], 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_LE(oracle::rel_err(block[i * n + j], ref(i, j)), 1e-12);
    }
  }
}

TEST(PairwiseDistance, RecurrenceAcrossRestartsMatchesDirectSum) {
  // N_eff = 300 > several restart periods (R = 64 at Q = 5).
  const auto t = oracle::random_trajectory(305, 3, 3);
  const std::size_t Q = 5;
  const auto win = vsa::trim_for_delays(t, Q);
  const auto ref = oracle::delay_sq_distances(t, Q);
  const std::size_t n = win.size();
  for (auto [rb, re] : {std::pair<std::size_t, std::size_t>{0, 7}, {190, 230}, {n - 5, n}}) {
    const auto block = vsa::pairwise_sq_distance_block(win, rb, re, 0, n);
    for (std::size_t i = rb; i < re; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        ASSERT_LE(std::abs(block[(i - rb) * n + j] - ref(i, j)), 1e-12 * std::max(1.0, ref(i, j)))
            << i << "," << j;
      }
    }
  }
  const auto sub = vsa::pairwise_sq_distance_block(win, 10, 12, 100, 140);
  for (std::size_t i = 10; i < 12; ++i) {
    for (std::size_t j = 100; j < 140; ++j) {
      EXPECT_EQ(sub[(i - 10) * 40 + (j - 100)],
                vsa::pairwise_sq_distance_block(win, i, i + 1, 0, n)[j]);
    }
  }
  EXPECT_THROW(vsa::pairwise_sq_distance_block(win, 0, n + 1, 0, 1), vsa::ValidationError);
}

TEST(PairwiseDistance, StreamedRangesAgreeBitwise) {
  const auto t = oracle::random_trajectory(400, 3, 4);
  const auto win = vsa::trim_for_delays(t, 7);
  const auto src = vsa::delay_distance_source(win);
  const auto all = collect(src, 0, win.n_eff());
  const auto part = collect(src, 150, 170);
  const std::size_t row = 3 * win.size();
  for (std::size_t k = 0; k < part.size(); ++k) {
    ASSERT_EQ(std::bit_cast<std::uint64_t>(part[k]),
              std::bit_cast<std::uint64_t>(all[150 * row + k]));
  }
  const auto block = vsa::pairwise_sq_distance_block(win, 0, win.size(), 0, win.size());
  for (std::size_t k = 0; k < block.size(); ++k) {
    ASSERT_EQ(std::bit_cast<std::uint64_t>(block[k]), std::bit_cast<std::uint64_t>(all[k]));
  }
}

TEST(PairwiseDistance, TimeConstantSignals) {
  std::vector<double> data;
  for (int n = 0; n < 30; ++n) {
    data.push_back(1.5);
    data.push_back(-0.5);
  }
  const vsa::FieldTrajectory t(30, 2, 0.1, 1.0, data);
  for (std::size_t Q : {1u, 4u, 20u}) {
    const auto win = vsa::trim_for_delays(t, Q);
    const auto b = vsa::pairwise_sq_distance_block(win, 0, 2, 0, win.size());
    for (std::size_t j = 0; j < win.size(); ++j) {
      EXPECT_NEAR(b[j], j % 2 == 0 ? 0.0 : 4.0, 1e-13);
    }
  }
}

TEST(PairwiseDistance, SpatialRollPermutesBitwise) {
  const auto t = oracle::random_trajectory(90, 5, 5);
  const long g = 2;
  const auto rolled = vsa::roll_spatial(t, g);
  const auto wa = vsa::trim_for_delays(t, 6);
  const auto wb = vsa::trim_for_delays(rolled, 6);
  const std::size_t n = wa.size(), S = 5;
  const auto a = vsa::pairwise_sq_distance_block(wa, 0, n, 0, n);
  const auto b = vsa::pairwise_sq_distance_block(wb, 0, n, 0, n);
  auto map = [&](std::size_t i) { return i - i % S + (i % S + g) % S; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      ASSERT_EQ(std::bit_cast<std::uint64_t>(a[i * n + j]),
                std::bit_cast<std::uint64_t>(b[map(i) * n + map(j)]));
    }
  }
}

TEST(StateDistance, MatchesWeightedDirectSum) {
  const auto t = oracle::random_trajectory(150, 4, 6);
  const std::size_t Q = 3;
  const auto win = vsa::trim_for_delays(t, Q);
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  const auto src = vsa::state_distance_source(win, w);
  const auto all = collect(src, 0, win.n_eff());
  const std::size_t Ne = win.n_eff();
  for (std::size_t a = 0; a < Ne; ++a) {
    for (std::size_t b = 0; b < Ne; ++b) {
      double acc = 0.0;
      for (std::size_t q = 0; q < Q; ++q) {
        for (std::size_t s = 0; s < 4; ++s) {
          const double d = t(Q + a - q, s) - t(Q + b - q, s);
          acc += w[s] * d * d;
        }
      }
      ASSERT_NEAR(all[a * Ne + b], acc / double(Q), 1e-13);
    }
  }
  EXPECT_THROW(vsa::state_distance_source(win, std::vector<double>(3, 0.3)),
               vsa::ValidationError);
}

TEST(DelayDistance, StabilizesAsDelaysDouble) {
  // Q runs 64..512, so 2Q = 1024 delays must be available at every probe.
  vsa::KsConfig c;
  c.samples = 2300;
  c.spinup = 500.0;
  const auto t = vsa::integrate_ks(c, vsa::ks_initial_state(c.points));
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> pick_n(1100, 2299), pick_s(0, c.points - 1);
  std::vector<std::array<std::size_t, 4>> probes(64);
  for (auto& p : probes) p = {pick_n(rng), pick_s(rng), pick_n(rng), pick_s(rng)};
  auto dq = [&](const std::array<std::size_t, 4>& p, std::size_t Q) {
    const auto win = vsa::trim_for_delays(t, Q);
    const auto a = vsa::delay_vector(win, p[0], p[1]);
    const auto b = vsa::delay_vector(win, p[2], p[3]);
    double acc = 0.0;
    for (std::size_t q = 0; q < Q; ++q) acc += (a[q] - b[q]) * (a[q] - b[q]);
    return acc / double(Q);
  };
  double prev = 1e300;
  for (std::size_t Q = 64; Q <= 512; Q *= 2) {
    double worst = 0.0;
    for (const auto& p : probes) worst = std::max(worst, std::abs(dq(p, Q) - dq(p, 2 * Q)));
    EXPECT_LT(worst, prev) << "Q=" << Q;
    prev = worst;
  }
}

TEST(DefaultKnn, FiftyPerDecade) {
  EXPECT_EQ(vsa::default_knn(64025), 250u);
  EXPECT_EQ(vsa::default_knn(1000), 150u);
  EXPECT_EQ(vsa::default_knn(1001), 200u);
}

}  // namespace
