#include "sedkit/augment.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "sedkit/error.h"
#include "sedkit/random.h"

namespace sedkit {

namespace {

void check_same_shape(const Spectrogram& a, const Spectrogram& b) {
  if (!a.values().same_shape(b.values())) throw ContractError("spectrograms differ in shape");
}

void check_lambda(double lam) {
  if (!(lam >= 0.0 && lam <= 1.0)) throw ContractError("mixing coefficient must lie in [0, 1]");
}

double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct BinStats {
  double mean;
  double stddev;
};

BinStats row_stats(std::span<const double> row) {
  double mean = 0.0;
  for (double v : row) mean += v;
  mean /= static_cast<double>(row.size());
  double var = 0.0;
  for (double v : row) var += (v - mean) * (v - mean);
  var /= static_cast<double>(row.size());
  return {mean, std::sqrt(var)};
}

}  // namespace

Spectrogram::Spectrogram(Matrix values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0) throw SizeError("spectrogram is empty");
  require_finite(values_, "spectrogram");
}

void AugmentConfig::validate() const {
  if (!(mixup_alpha > 0.0)) throw ContractError("mixup_alpha must be positive");
  if (!(fms_alpha > 0.0)) throw ContractError("fms_alpha must be positive");
  if (!(fms_prob >= 0.0 && fms_prob <= 1.0)) throw ContractError("fms_prob must lie in [0, 1]");
  if (filter_bands_min == 0 || filter_bands_min > filter_bands_max) {
    throw ContractError("filter band range must satisfy 1 <= min <= max");
  }
  if (!(filter_db_min <= filter_db_max)) throw ContractError("filter dB range is inverted");
  if (!(warp_min > 0.0 && warp_min <= warp_max)) throw ContractError("warp range must satisfy 0 < min <= max");
}

Spectrogram mixup(const Spectrogram& a, const Spectrogram& b, double lam) {
  check_same_shape(a, b);
  check_lambda(lam);
  Matrix out(a.bins(), a.frames());
  const auto da = a.values().data();
  const auto db = b.values().data();
  auto d = out.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = lam * da[i] + (1.0 - lam) * db[i];
  return Spectrogram(std::move(out));
}

std::vector<double> mixup(std::span<const double> a, std::span<const double> b, double lam) {
  if (a.size() != b.size()) throw ContractError("sequences differ in length");
  check_lambda(lam);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = lam * a[i] + (1.0 - lam) * b[i];
  return out;
}

Spectrogram freq_mixstyle(const Spectrogram& a, const Spectrogram& b, double lam, double eps) {
  check_same_shape(a, b);
  check_lambda(lam);
  Matrix out(a.bins(), a.frames());
  for (std::size_t f = 0; f < a.bins(); ++f) {
    const auto ra = a.values().row(f);
    const BinStats sa = row_stats(ra);
    const BinStats sb = row_stats(b.values().row(f));
    const double mu_mix = lam * sa.mean + (1.0 - lam) * sb.mean;
    const double sigma_mix = lam * sa.stddev + (1.0 - lam) * sb.stddev;
    auto ro = out.row(f);
    for (std::size_t t = 0; t < ra.size(); ++t) {
      ro[t] = sigma_mix * (ra[t] - sa.mean) / (sa.stddev + eps) + mu_mix;
    }
  }
  return Spectrogram(std::move(out));
}

FilterDraw draw_filter(std::size_t bins, const AugmentConfig& cfg, std::uint64_t rng_seed) {
  cfg.validate();
  if (bins < 2) throw ContractError("filter augmentation needs at least two bins");
  Rng rng = make_rng(rng_seed);
  std::uniform_int_distribution<std::size_t> band_count(cfg.filter_bands_min, cfg.filter_bands_max);
  const std::size_t k = band_count(rng);
  FilterDraw draw;
  draw.boundaries.resize(k);
  draw.gains_db.resize(k);
  const auto top = static_cast<double>(bins - 1);
  for (auto& b : draw.boundaries) b = uniform(rng, 0.0, top);
  std::sort(draw.boundaries.begin(), draw.boundaries.end());
  for (auto& g : draw.gains_db) g = uniform(rng, cfg.filter_db_min, cfg.filter_db_max);
  return draw;
}

std::vector<double> filter_gain_curve(std::size_t bins, const FilterDraw& draw) {
  if (draw.boundaries.empty() || draw.boundaries.size() != draw.gains_db.size()) {
    throw ContractError("filter draw needs matching boundaries and gains");
  }
  const auto& x = draw.boundaries;
  const auto& g = draw.gains_db;
  std::vector<double> curve(bins);
  for (std::size_t f = 0; f < bins; ++f) {
    const auto pos = static_cast<double>(f);
    if (pos <= x.front()) {
      curve[f] = g.front();
    } else if (pos >= x.back()) {
      curve[f] = g.back();
    } else {
      // first boundary strictly greater than pos
      const auto hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), pos) - x.begin());
      const std::size_t lo = hi - 1;
      const double span = x[hi] - x[lo];
      const double w = span > 0.0 ? (pos - x[lo]) / span : 0.0;
      curve[f] = g[lo] + w * (g[hi] - g[lo]);
    }
  }
  return curve;
}

Spectrogram filter_augment(const Spectrogram& a, const AugmentConfig& cfg, std::uint64_t rng_seed) {
  const auto curve = filter_gain_curve(a.bins(), draw_filter(a.bins(), cfg, rng_seed));
  Matrix out = a.values();
  for (std::size_t f = 0; f < a.bins(); ++f) {
    for (double& v : out.row(f)) v += curve[f];
  }
  return Spectrogram(std::move(out));
}

Spectrogram freq_warp(const Spectrogram& a, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ContractError("warp scale must be positive");
  const std::size_t bins = a.bins();
  if (bins < 2) throw ContractError("frequency warping needs at least two bins");
  const auto top = static_cast<double>(bins - 1);
  const double shift = (1.0 - scale) * top / 2.0;
  Matrix out(bins, a.frames());
  for (std::size_t f = 0; f < bins; ++f) {
    const double src = std::clamp(static_cast<double>(f) * scale + shift, 0.0, top);
    const auto lo = static_cast<std::size_t>(std::floor(src));
    const double frac = src - static_cast<double>(lo);
    const auto row_lo = a.values().row(lo);
    auto row_out = out.row(f);
    if (frac == 0.0 || lo + 1 >= bins) {
      std::copy(row_lo.begin(), row_lo.end(), row_out.begin());
      continue;
    }
    const auto row_hi = a.values().row(lo + 1);
    for (std::size_t t = 0; t < row_out.size(); ++t) {
      row_out[t] = row_lo[t] + frac * (row_hi[t] - row_lo[t]);
    }
  }
  return Spectrogram(std::move(out));
}

double draw_warp_scale(const AugmentConfig& cfg, std::uint64_t rng_seed) {
  cfg.validate();
  Rng rng = make_rng(rng_seed);
  return uniform(rng, cfg.warp_min, cfg.warp_max);
}

AugmentOutcome augment_pipeline(const Spectrogram& a, const Spectrogram* partner,
                                const AugmentConfig& cfg, std::uint64_t rng_seed) {
  cfg.validate();
  AugmentOutcome result{a, {}};
  Spectrogram& x = result.spectrogram;
  if (cfg.enable_warp && a.bins() >= 2) {
    const double scale = draw_warp_scale(cfg, derive_seed(rng_seed, 1));
    x = freq_warp(x, scale);
    result.record.warp_scale = scale;
  }
  if (cfg.enable_filter && a.bins() >= 2) {
    const std::uint64_t seed = derive_seed(rng_seed, 2);
    FilterDraw draw = draw_filter(x.bins(), cfg, seed);
    x = filter_augment(x, cfg, seed);
    result.record.filter = std::move(draw);
  }
  if (partner != nullptr) {
    Rng rng = make_rng(derive_seed(rng_seed, 3));
    if (cfg.enable_freq_mixstyle) {
      std::bernoulli_distribution apply(cfg.fms_prob);
      const bool use = apply(rng);
      const double lam = sample_symmetric_beta(rng, cfg.fms_alpha);
      if (use) {
        x = freq_mixstyle(x, *partner, lam);
        result.record.fms_lambda = lam;
      }
    }
    if (cfg.enable_mixup) {
      const double lam = sample_symmetric_beta(rng, cfg.mixup_alpha);
      x = mixup(x, *partner, lam);
      result.record.mixup_lambda = lam;
    }
  }
  return result;
}

}  // namespace sedkit
