#pragma once

// Desk-scale linear probe: trains only the position-wise linear head on frozen
// embeddings with the frame-level distillation loss.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sedkit/distill.h"
#include "sedkit/resample.h"

namespace sedkit {

struct ProbeClip {
  EmbeddingSequence embedding;  // 250 x D
  Matrix hard;                  // 250 x C, 0/1
  std::optional<Matrix> soft;   // 250 x C in (0, 1); hard labels are reused when absent
};

struct ProbeConfig {
  KdConfig kd;
  ScheduleConfig schedule{.peak_lr = 0.5, .warmup_steps = 0, .total_steps = 1, .final_lr = 0.0};
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  bool mixup = false;
  double mixup_alpha = 0.2;
};

struct ProbeResult {
  LinearHead head;
  std::size_t steps = 0;
  std::vector<double> batch_losses;
  // kd_loss of the returned head averaged over all training clips.
  double final_loss = 0.0;
};

// Mini-batch gradient descent from a zero-initialised head with the
// lr_at schedule. Deterministic for a fixed seed. Throws TrainingError with the
// step index if the loss stops being finite.
ProbeResult probe_fit(std::span<const ProbeClip> train, const ProbeConfig& cfg,
                      std::uint64_t rng_seed);

// Mean kd_loss of `head` over the clips.
double probe_loss(std::span<const ProbeClip> clips, const LinearHead& head, const KdConfig& kd);

}  // namespace sedkit
