#pragma once

// Spectrogram-level data augmentations: mixup, Freq-MixStyle, filter
// augmentation and frequency warping. Every randomized transform is a pure
// function of its inputs and an explicit seed.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sedkit/matrix.h"

namespace sedkit {

// F x T log-mel magnitudes (rows are frequency bins).
class Spectrogram {
 public:
  Spectrogram() = default;
  explicit Spectrogram(Matrix values);

  const Matrix& values() const noexcept { return values_; }
  std::size_t bins() const noexcept { return values_.rows(); }
  std::size_t frames() const noexcept { return values_.cols(); }

  friend bool operator==(const Spectrogram&, const Spectrogram&) = default;

 private:
  Matrix values_;
};

struct AugmentConfig {
  double mixup_alpha = 0.2;
  double fms_alpha = 0.3;
  double fms_prob = 0.4;
  std::size_t filter_bands_min = 2;
  std::size_t filter_bands_max = 5;
  double filter_db_min = -6.0;
  double filter_db_max = 6.0;
  double warp_min = 0.9;
  double warp_max = 1.1;
  bool enable_mixup = true;
  bool enable_freq_mixstyle = true;
  bool enable_filter = true;
  bool enable_warp = true;

  void validate() const;
};

// lam * a + (1 - lam) * b.
Spectrogram mixup(const Spectrogram& a, const Spectrogram& b, double lam);
// Waveform-level mixup: the same convex combination on 1-D sequences.
std::vector<double> mixup(std::span<const double> a, std::span<const double> b, double lam);

// Re-normalises each frequency bin of `a` to statistics interpolated between
// a and b: out = sigma_mix * (a - mu_a) / (sigma_a + eps) + mu_mix.
Spectrogram freq_mixstyle(const Spectrogram& a, const Spectrogram& b, double lam, double eps = 1e-5);

// Random draws behind one filter_augment call.
struct FilterDraw {
  std::vector<double> boundaries;  // sorted bin positions in [0, F - 1]
  std::vector<double> gains_db;    // one per boundary
};

FilterDraw draw_filter(std::size_t bins, const AugmentConfig& cfg, std::uint64_t rng_seed);
// Piecewise-linear gain per bin through (boundary, gain) points, flat outside.
std::vector<double> filter_gain_curve(std::size_t bins, const FilterDraw& draw);
// Adds the drawn gain curve (dB) to every frame of each bin.
Spectrogram filter_augment(const Spectrogram& a, const AugmentConfig& cfg, std::uint64_t rng_seed);

// Center-anchored stretch of the frequency axis: output bin f reads source
// coordinate clamp(f*scale + (1-scale)*(F-1)/2, 0, F-1) with linear interpolation.
Spectrogram freq_warp(const Spectrogram& a, double scale);
double draw_warp_scale(const AugmentConfig& cfg, std::uint64_t rng_seed);

// What augment_pipeline applied, for logging and for mixing targets downstream.
struct AugmentRecord {
  std::optional<double> warp_scale;
  std::optional<FilterDraw> filter;
  std::optional<double> fms_lambda;
  std::optional<double> mixup_lambda;
};

struct AugmentOutcome {
  Spectrogram spectrogram;
  AugmentRecord record;
};

// Frequency warping, filter augmentation, Freq-MixStyle (with probability
// fms_prob) and mixup, in that order, each when enabled. The two mixing
// transforms need a partner and are skipped without one.
AugmentOutcome augment_pipeline(const Spectrogram& a, const Spectrogram* partner,
                                const AugmentConfig& cfg, std::uint64_t rng_seed);

}  // namespace sedkit
