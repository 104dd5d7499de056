#include "sedkit/resample.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sedkit/error.h"

namespace sedkit {

EmbeddingSequence::EmbeddingSequence(std::string clip_id, Matrix values)
    : clip_id_(std::move(clip_id)), values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0) {
    throw SizeError("embedding sequence '" + clip_id_ + "' is empty");
  }
  require_finite(values_, "embedding sequence");
}

EmbeddingSequence adaptive_avg_pool(const EmbeddingSequence& e, std::size_t out_frames) {
  const std::size_t s = e.frames();
  const std::size_t d = e.dim();
  if (out_frames == 0) throw ContractError("adaptive_avg_pool needs at least one output frame");
  if (out_frames > s) {
    throw ContractError("adaptive_avg_pool cannot upsample " + std::to_string(s) + " -> " +
                        std::to_string(out_frames) + " frames; use linear_interp");
  }
  const Matrix& in = e.values();
  Matrix out(out_frames, d);
  for (std::size_t i = 0; i < out_frames; ++i) {
    const std::size_t begin = (i * s) / out_frames;
    const std::size_t end = ((i + 1) * s + out_frames - 1) / out_frames;
    const auto count = static_cast<double>(end - begin);
    // Mean accumulated as an offset from the first frame: constant buckets
    // come out bit-exact.
    for (std::size_t k = 0; k < d; ++k) {
      const double base = in(begin, k);
      double acc = 0.0;
      for (std::size_t t = begin + 1; t < end; ++t) acc += in(t, k) - base;
      out(i, k) = base + acc / count;
    }
  }
  return EmbeddingSequence(e.clip_id(), std::move(out));
}

EmbeddingSequence linear_interp(const EmbeddingSequence& e, std::size_t out_frames) {
  const std::size_t s = e.frames();
  const std::size_t d = e.dim();
  if (out_frames == 0) throw ContractError("linear_interp needs at least one output frame");
  const Matrix& in = e.values();
  Matrix out(out_frames, d);
  if (s == 1 || out_frames == 1) {
    for (std::size_t i = 0; i < out_frames; ++i) {
      for (std::size_t k = 0; k < d; ++k) out(i, k) = in(0, k);
    }
    return EmbeddingSequence(e.clip_id(), std::move(out));
  }
  for (std::size_t i = 0; i < out_frames; ++i) {
    const double pos = static_cast<double>(i * (s - 1)) / static_cast<double>(out_frames - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo >= s - 1) {
      for (std::size_t k = 0; k < d; ++k) out(i, k) = in(s - 1, k);
      continue;
    }
    const double frac = pos - static_cast<double>(lo);
    for (std::size_t k = 0; k < d; ++k) {
      const double a = in(lo, k);
      const double b = in(lo + 1, k);
      const double v = a + frac * (b - a);
      out(i, k) = std::clamp(v, std::min(a, b), std::max(a, b));
    }
  }
  return EmbeddingSequence(e.clip_id(), std::move(out));
}

EmbeddingSequence resample(const EmbeddingSequence& e, std::size_t out_frames) {
  if (e.frames() > out_frames) return adaptive_avg_pool(e, out_frames);
  if (e.frames() < out_frames) return linear_interp(e, out_frames);
  return e;
}

EmbeddingSequence crop_random(const EmbeddingSequence& e, std::size_t length_frames,
                              std::uint64_t rng_seed) {
  const std::size_t start = crop_start(e.frames(), length_frames, rng_seed);
  return EmbeddingSequence(e.clip_id(), e.values().slice_rows(start, length_frames));
}

LinearHead LinearHead::zeros(std::size_t classes, std::size_t dim) {
  return LinearHead{Matrix(classes, dim, 0.0), std::vector<double>(classes, 0.0)};
}

void LinearHead::validate() const {
  if (weight.rows() == 0 || weight.cols() == 0) throw SizeError("linear head is empty");
  if (bias.size() != weight.rows()) {
    throw SizeError("linear head bias has " + std::to_string(bias.size()) + " entries for " +
                    std::to_string(weight.rows()) + " classes");
  }
  require_finite(weight, "linear head weight");
  for (double b : bias) {
    if (!std::isfinite(b)) throw NumericError("non-finite value in linear head bias");
  }
}

ScoreMatrix head_forward(const EmbeddingSequence& e, const LinearHead& head,
                         const VocabularyPtr& vocabulary, double resolution,
                         bool require_canonical) {
  head.validate();
  if (require_canonical && e.frames() != kCanonicalFrames) {
    throw ContractError("head_forward expects " + std::to_string(kCanonicalFrames) +
                        " frames, got " + std::to_string(e.frames()));
  }
  if (e.dim() != head.dim()) {
    throw ContractError("embedding dim " + std::to_string(e.dim()) + " != head dim " +
                        std::to_string(head.dim()));
  }
  if (!vocabulary || vocabulary->size() != head.classes()) {
    throw ContractError("head classes do not match vocabulary size");
  }
  const Matrix& in = e.values();
  Matrix logits(e.frames(), head.classes());
  for (std::size_t t = 0; t < e.frames(); ++t) {
    const auto x = in.row(t);
    for (std::size_t c = 0; c < head.classes(); ++c) {
      const auto w = head.weight.row(c);
      double acc = head.bias[c];
      for (std::size_t k = 0; k < x.size(); ++k) acc += w[k] * x[k];
      logits(t, c) = acc;
    }
  }
  return ScoreMatrix(FrameGrid(resolution, e.frames()), vocabulary, std::move(logits),
                     ScoreKind::Logit);
}

void ScheduleConfig::validate() const {
  if (!(peak_lr > 0.0)) throw ContractError("peak_lr must be positive");
  if (!(final_lr >= 0.0)) throw ContractError("final_lr must be non-negative");
  if (total_steps <= warmup_steps) throw ContractError("total_steps must exceed warmup_steps");
}

double lr_at(const ScheduleConfig& cfg, std::size_t step) {
  cfg.validate();
  if (step >= cfg.total_steps) return cfg.final_lr;
  if (step < cfg.warmup_steps) {
    return cfg.peak_lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
  }
  const double progress = static_cast<double>(step - cfg.warmup_steps) /
                          static_cast<double>(cfg.total_steps - cfg.warmup_steps);
  return cfg.final_lr +
         (cfg.peak_lr - cfg.final_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace sedkit
