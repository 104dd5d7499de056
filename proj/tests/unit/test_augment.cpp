#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.h"
#include "sedkit/augment.h"
#include "sedkit/error.h"

using namespace sedkit;
using Catch::Approx;
using testing_support::matrix_from_rows;

namespace {

Spectrogram random_spec(std::size_t f, std::size_t t, std::uint64_t seed, double scale = 10.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(-20.0, scale);
  Matrix m(f, t);
  for (double& v : m.data()) v = n(rng);
  return Spectrogram(m);
}

Spectrogram constant_spec(std::size_t f, std::size_t t, double v) { return Spectrogram(Matrix(f, t, v)); }

}  // namespace

TEST_CASE("mixup") {
  const auto a = random_spec(8, 20, 1);
  const auto b = random_spec(8, 20, 2);
  CHECK(mixup(a, b, 1.0) == a);
  CHECK(mixup(a, b, 0.0) == b);
  CHECK(mixup(constant_spec(2, 2, 2.0), constant_spec(2, 2, 4.0), 0.5) == constant_spec(2, 2, 3.0));
  const auto m = mixup(a, b, 0.3);
  for (std::size_t i = 0; i < m.values().data().size(); ++i) {
    const double x = a.values().data()[i], y = b.values().data()[i];
    CHECK(m.values().data()[i] >= std::min(x, y) - 1e-12);
    CHECK(m.values().data()[i] <= std::max(x, y) + 1e-12);
  }
  CHECK_THROWS_AS(mixup(a, random_spec(8, 21, 3), 0.5), ContractError);
  CHECK_THROWS_AS(mixup(a, b, -0.1), ContractError);

  const std::vector<double> wa{1.0, 2.0}, wb{3.0, 6.0};
  CHECK(mixup(wa, wb, 0.5) == std::vector<double>{2.0, 4.0});
}

TEST_CASE("freq_mixstyle") {
  const auto a = random_spec(6, 50, 4);
  const auto b = random_spec(6, 50, 5, 3.0);
  SECTION("lambda 1 keeps a") {
    const auto out = freq_mixstyle(a, b, 1.0);
    for (std::size_t i = 0; i < a.values().data().size(); ++i) {
      CHECK(std::abs(out.values().data()[i] - a.values().data()[i]) < 1e-4);
    }
  }
  SECTION("constant partner at lambda 0") {
    const auto out = freq_mixstyle(a, constant_spec(6, 50, -3.5), 0.0);
    for (double v : out.values().data()) CHECK(v == Approx(-3.5).margin(1e-12));
  }
  SECTION("per-bin time mean equals the mixed mean") {
    const double lam = 0.37;
    const auto out = freq_mixstyle(a, b, lam);
    for (std::size_t f = 0; f < 6; ++f) {
      double ma = 0, mb = 0, mo = 0;
      for (std::size_t t = 0; t < 50; ++t) {
        ma += a.values()(f, t);
        mb += b.values()(f, t);
        mo += out.values()(f, t);
      }
      CHECK(std::abs(mo / 50 - (lam * ma / 50 + (1 - lam) * mb / 50)) < 1e-9);
    }
  }
  CHECK_THROWS_AS(freq_mixstyle(a, random_spec(5, 50, 1), 0.5), ContractError);
}

TEST_CASE("filter_augment") {
  AugmentConfig cfg;
  const auto a = random_spec(32, 10, 6);
  SECTION("zero dB range is the identity") {
    AugmentConfig flat = cfg;
    flat.filter_db_min = flat.filter_db_max = 0.0;
    CHECK(filter_augment(a, flat, 3) == a);
  }
  SECTION("a single boundary shifts everything by its gain") {
    AugmentConfig one = cfg;
    one.filter_bands_min = one.filter_bands_max = 1;
    one.filter_db_min = one.filter_db_max = 6.0;
    const auto out = filter_augment(a, one, 3);
    for (std::size_t i = 0; i < a.values().data().size(); ++i) {
      CHECK(out.values().data()[i] == Approx(a.values().data()[i] + 6.0).margin(1e-12));
    }
  }
  SECTION("applied gain is piecewise linear through the drawn points") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const FilterDraw d = draw_filter(32, cfg, seed);
      REQUIRE(d.boundaries.size() >= cfg.filter_bands_min);
      REQUIRE(d.boundaries.size() <= cfg.filter_bands_max);
      REQUIRE(std::is_sorted(d.boundaries.begin(), d.boundaries.end()));
      const auto out = filter_augment(constant_spec(32, 3, 0.0), cfg, seed);
      // Reconstruct the gain at every bin from the draw.
      for (std::size_t f = 0; f < 32; ++f) {
        const double x = static_cast<double>(f);
        double g;
        if (x <= d.boundaries.front()) {
          g = d.gains_db.front();
        } else if (x >= d.boundaries.back()) {
          g = d.gains_db.back();
        } else {
          std::size_t k = 0;
          while (d.boundaries[k + 1] < x) ++k;
          const double span = d.boundaries[k + 1] - d.boundaries[k];
          const double w = span > 0 ? (x - d.boundaries[k]) / span : 1.0;
          g = d.gains_db[k] + w * (d.gains_db[k + 1] - d.gains_db[k]);
        }
        for (std::size_t t = 0; t < 3; ++t) CHECK(out.values()(f, t) == Approx(g).margin(1e-9));
        CHECK(g >= cfg.filter_db_min);
        CHECK(g <= cfg.filter_db_max);
      }
    }
  }
  SECTION("commutes with a global offset and is seeded") {
    Matrix shifted = a.values();
    for (double& v : shifted.data()) v += 12.5;
    const auto x = filter_augment(Spectrogram(shifted), cfg, 8).values();
    const auto y = filter_augment(a, cfg, 8).values();
    for (std::size_t i = 0; i < x.data().size(); ++i) CHECK(x.data()[i] == Approx(y.data()[i] + 12.5).margin(1e-9));
    CHECK(filter_augment(a, cfg, 8) == filter_augment(a, cfg, 8));
    CHECK_FALSE(filter_augment(a, cfg, 8) == filter_augment(a, cfg, 9));
  }
  CHECK_THROWS_AS(filter_augment(random_spec(1, 5, 1), cfg, 1), ContractError);
}

TEST_CASE("freq_warp") {
  const auto a = random_spec(16, 4, 7);
  CHECK(freq_warp(a, 1.0) == a);
  const auto c = constant_spec(16, 4, 2.25);
  CHECK(freq_warp(c, 0.9) == c);
  CHECK(freq_warp(c, 1.1) == c);
  SECTION("center impulse stays put") {
    Matrix m(9, 1, 0.0);
    m(4, 0) = 1.0;
    const auto out = freq_warp(Spectrogram(m), 0.5);
    CHECK(out.values()(4, 0) == 1.0);
  }
  CHECK(freq_warp(a, 1.07).values().rows() == 16);
  CHECK_THROWS_AS(freq_warp(a, 0.0), ContractError);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const double k = draw_warp_scale(AugmentConfig{}, s);
    CHECK(k >= 0.9);
    CHECK(k <= 1.1);
  }
}

TEST_CASE("augment_pipeline") {
  const auto a = random_spec(16, 30, 8);
  const auto b = random_spec(16, 30, 9);
  AugmentConfig cfg;
  cfg.fms_prob = 1.0;
  const auto r1 = augment_pipeline(a, &b, cfg, 21);
  const auto r2 = augment_pipeline(a, &b, cfg, 21);
  CHECK(r1.spectrogram == r2.spectrogram);
  CHECK(r1.spectrogram.values().rows() == 16);
  CHECK(r1.spectrogram.values().cols() == 30);
  CHECK(r1.record.warp_scale.has_value());
  CHECK(r1.record.filter.has_value());
  CHECK(r1.record.fms_lambda.has_value());
  CHECK(r1.record.mixup_lambda.has_value());
  CHECK_FALSE(augment_pipeline(a, &b, cfg, 22).spectrogram == r1.spectrogram);

  const auto solo = augment_pipeline(a, nullptr, cfg, 21);
  CHECK_FALSE(solo.record.mixup_lambda.has_value());
  CHECK_FALSE(solo.record.fms_lambda.has_value());

  AugmentConfig off = cfg;
  off.enable_mixup = off.enable_freq_mixstyle = off.enable_filter = off.enable_warp = false;
  CHECK(augment_pipeline(a, &b, off, 1).spectrogram == a);

  AugmentConfig bad = cfg;
  bad.fms_prob = 2.0;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.warp_min = 1.2;
  CHECK_THROWS(bad.validate());
}
