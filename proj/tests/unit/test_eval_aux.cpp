#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.h"
#include "sedkit/aso.h"
#include "sedkit/error.h"
#include "sedkit/median_filter.h"
#include "sedkit/onset.h"

using namespace sedkit;
using Catch::Approx;

TEST_CASE("median window size") {
  CHECK(median_window_frames(0.48, 0.04) == 13);
  CHECK(median_window_frames(0.12, 0.04) == 3);
  CHECK(median_window_frames(0.04, 0.04) == 1);
}

TEST_CASE("median_filter_column") {
  CHECK(median_filter_column(std::vector<double>{0, 0, 1, 0, 0}, 3) == std::vector<double>(5, 0.0));
  CHECK(median_filter_column(std::vector<double>(7, 0.3), 5) == std::vector<double>(7, 0.3));
  // Window longer than the signal: whole-signal lower median.
  CHECK(median_filter_column(std::vector<double>{4, 1, 3, 2}, 9) == std::vector<double>(4, 2.0));
  // Edges shrink symmetrically: first sample is its own median.
  CHECK(median_filter_column(std::vector<double>{5, 1, 2, 3, 4}, 3)[0] == 5.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(40);
    for (double& v : x) v = u(rng);
    const auto y = median_filter_column(x, 7);
    REQUIRE(y.size() == x.size());
    for (double v : y) CHECK(std::find(x.begin(), x.end(), v) != x.end());
  }
  // A binary signal whose runs are all at least the window long is a root.
  std::vector<double> root{0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0, 1, 1, 1};
  CHECK(median_filter_column(root, 3) == root);
  CHECK(median_filter_column(median_filter_column(root, 3), 3) == root);
}

TEST_CASE("median_filter on a score matrix") {
  const auto vocab = testing_support::letters_vocabulary(2);
  Matrix m(30, 2, 0.1);
  m(10, 0) = 0.9;
  for (std::size_t t = 5; t < 25; ++t) m(t, 1) = 0.8;
  const auto out = median_filter(ScoreMatrix(FrameGrid(0.04, 30), vocab, m), 0.48);
  CHECK(out.scores()(10, 0) == 0.1);
  CHECK(out.scores()(15, 1) == 0.8);
  CHECK(out.num_frames() == 30);
  CHECK_THROWS_AS(median_filter(ScoreMatrix(FrameGrid(0.04, 30), vocab, m), 0.0), ContractError);
}

TEST_CASE("onset_f") {
  const ClipEvents gt{{"a", {{0, 1.0, 2.0}, {1, 3.0, 4.0}}}};
  SECTION("identical") {
    const auto r = onset_f(gt, gt);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
  }
  SECTION("no predictions") {
    const auto r = onset_f({}, gt);
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.f1 == 0.0);
    CHECK(r.fn == 2);
  }
  SECTION("tolerance flip") {
    const ClipEvents g{{"a", {{0, 1.00, 2.0}}}};
    const ClipEvents p{{"a", {{0, 1.04, 2.0}}}};
    CHECK(onset_f(p, g, {0.05}).tp == 1);
    CHECK(onset_f(p, g, {0.03}).tp == 0);
  }
  SECTION("hand fixture") {
    // 3 ground truths, 4 predictions, 2 matches; one prediction has the wrong class.
    const ClipEvents g{{"a", {{0, 1.0, 1.5}, {0, 3.0, 3.5}}}, {"b", {{1, 0.5, 0.9}}}};
    const ClipEvents p{{"a", {{0, 1.02, 1.5}, {0, 3.2, 3.5}, {1, 1.0, 1.4}}}, {"b", {{1, 0.47, 0.9}}}};
    const auto r = onset_f(p, g);
    CHECK(r.tp == 2);
    CHECK(r.fp == 2);
    CHECK(r.fn == 1);
    CHECK(r.precision == Approx(0.5));
    CHECK(r.recall == Approx(2.0 / 3.0));
    CHECK(r.f1 == Approx(4.0 / 7.0));
  }
  SECTION("swapping roles exchanges precision and recall") {
    const ClipEvents p{{"a", {{0, 1.01, 2.0}, {0, 5.0, 6.0}}}};
    const auto r = onset_f(p, gt);
    const auto s = onset_f(gt, p);
    CHECK(r.precision == s.recall);
    CHECK(r.recall == s.precision);
    CHECK(r.f1 == s.f1);
  }
  CHECK(match_onsets({1.0, 1.02}, {1.01}, 0.05) == 1);
  CHECK(match_onsets({0.9, 1.1}, {1.0, 1.05}, 0.1) == 2);
}

TEST_CASE("violation ratio and ASO") {
  const std::vector<double> hi{0.9, 0.95, 0.91, 0.93, 0.97};
  const std::vector<double> lo{0.1, 0.2, 0.15, 0.12, 0.3};
  CHECK(violation_ratio(hi, lo) == 0.0);
  const auto dom = aso(hi, lo);
  CHECK(dom.epsilon_min == 0.0);
  CHECK(dom.significant);
  CHECK(violation_ratio(hi, hi) == 0.5);
  CHECK(violation_ratio(lo, hi) == 1.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(15), b(23);
    for (double& v : a) v = n(rng) + 0.3;
    for (double& v : b) v = n(rng);
    CHECK(violation_ratio(a, b) + violation_ratio(b, a) == Approx(1.0).margin(1e-12));
    CHECK(std::abs(violation_ratio(a, b) - oracle::violation_ratio(a, b)) < 1e-3);
  }

  CHECK_THROWS_AS(aso(std::vector<double>{1.0}, lo), ContractError);
  AsoConfig bad;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(aso(hi, lo, bad), ContractError);
}

TEST_CASE("ASO bootstrap bound") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> a(20), b(20);
  for (double& v : a) v = n(rng) + 0.5;
  for (double& v : b) v = n(rng);
  AsoConfig cfg;
  cfg.bootstrap_samples = 500;
  double previous = -1.0;
  for (std::size_t m : {1, 2, 5, 20}) {
    cfg.num_comparisons = m;
    const double e = aso(a, b, cfg).epsilon_min;
    CHECK(e >= previous);
    CHECK(e >= 0.0);
    CHECK(e <= 1.0);
    previous = e;
  }
  cfg.num_comparisons = 5;
  cfg.threads = 1;
  const auto one = aso(a, b, cfg);
  cfg.threads = 4;
  const auto four = aso(a, b, cfg);
  CHECK(one.epsilon_min == four.epsilon_min);

  // Seed-averaged against the independent bootstrap.
  double mine = 0.0, ref = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.rng_seed = seed;
    cfg.bootstrap_samples = 1000;
    mine += aso(a, b, cfg).epsilon_min / 10;
    ref += oracle::epsilon_min(a, b, cfg.alpha, cfg.num_comparisons, 1000, 1000 + seed) / 10;
  }
  CHECK(std::abs(mine - ref) < 0.02);
}
