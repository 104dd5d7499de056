#pragma once

// Temporal resampling of embedding sequences onto the canonical frame grid,
// the position-wise linear prediction head, and its learning-rate schedule.

#include <cstddef>
#include <cstdint>
#include <string>

#include "sedkit/matrix.h"
#include "sedkit/timeline.h"

namespace sedkit {

// S x D embedding sequence of one clip (rows are frames).
class EmbeddingSequence {
 public:
  EmbeddingSequence() = default;
  // Throws NumericError on non-finite values, SizeError on an empty matrix.
  EmbeddingSequence(std::string clip_id, Matrix values);

  const std::string& clip_id() const noexcept { return clip_id_; }
  const Matrix& values() const noexcept { return values_; }
  std::size_t frames() const noexcept { return values_.rows(); }
  std::size_t dim() const noexcept { return values_.cols(); }

 private:
  std::string clip_id_;
  Matrix values_;
};

// Output frame i is the mean of input frames
// [floor(i*S/out), ceil((i+1)*S/out)). Requires out_frames <= S.
EmbeddingSequence adaptive_avg_pool(const EmbeddingSequence& e, std::size_t out_frames);

// Endpoint-aligned linear interpolation: output frame i samples source
// coordinate i*(S-1)/(out-1). A single-frame input is broadcast.
EmbeddingSequence linear_interp(const EmbeddingSequence& e, std::size_t out_frames);

// Pools when S > out_frames, interpolates when S < out_frames, copies otherwise.
EmbeddingSequence resample(const EmbeddingSequence& e, std::size_t out_frames = kCanonicalFrames);

EmbeddingSequence crop_random(const EmbeddingSequence& e, std::size_t length_frames,
                              std::uint64_t rng_seed);

struct LinearHead {
  Matrix weight;              // C x D
  std::vector<double> bias;   // C

  static LinearHead zeros(std::size_t classes, std::size_t dim);
  std::size_t classes() const noexcept { return weight.rows(); }
  std::size_t dim() const noexcept { return weight.cols(); }
  // Throws on inconsistent shapes or non-finite entries.
  void validate() const;

  friend bool operator==(const LinearHead&, const LinearHead&) = default;
};

// logits(t, c) = sum_d W[c, d] * e[t, d] + b[c]. The head applies to any
// sequence length; require_canonical enforces the 250-frame contract.
ScoreMatrix head_forward(const EmbeddingSequence& e, const LinearHead& head,
                         const VocabularyPtr& vocabulary, double resolution = kDefaultResolution,
                         bool require_canonical = true);

struct ScheduleConfig {
  double peak_lr = 1e-3;
  std::size_t warmup_steps = 5000;
  std::size_t total_steps = 100000;
  double final_lr = 0.0;

  void validate() const;
};

// Linear warmup from 0 to peak_lr, then cosine decay to final_lr at
// total_steps. Steps past total_steps return final_lr.
double lr_at(const ScheduleConfig& cfg, std::size_t step);

}  // namespace sedkit
