#pragma once

// Ensemble distillation targets and the frame-level knowledge-distillation
// loss used to train students on them.

#include <span>

#include "sedkit/matrix.h"
#include "sedkit/timeline.h"

namespace sedkit {

// Soft targets: sigmoid of the members' averaged logits, strictly inside (0, 1).
class EnsembleTargets {
 public:
  EnsembleTargets() = default;
  // Applies the sigmoid once to averaged logits. Saturated values are pulled
  // to the nearest doubles inside (0, 1).
  explicit EnsembleTargets(const ScoreMatrix& averaged_logits);

  const TargetMatrix& targets() const noexcept { return targets_; }
  const Matrix& values() const noexcept { return targets_.values(); }

 private:
  TargetMatrix targets_;
};

// Elementwise mean of the members' logits. Members must share shape,
// vocabulary and grid and be logit-valued.
ScoreMatrix ensemble_average(std::span<const ScoreMatrix> logit_sets);

struct KdConfig {
  // Weight on the distillation term; (1 - lambda_kd) weighs the hard labels.
  double lambda_kd = 0.5;

  void validate() const;
};

// (1 - lambda) * BCE(sigmoid(z), hard) + lambda * BCE(sigmoid(z), soft), each
// averaged over frames x classes. Throws NumericError on NaN input.
double kd_loss(const Matrix& student_logits, const Matrix& hard, const Matrix& soft,
               const KdConfig& cfg);
double kd_loss(const ScoreMatrix& student_logits, const TargetMatrix& hard,
               const EnsembleTargets& soft, const KdConfig& cfg);

// d loss / d z = [(1 - lambda)(sigmoid(z) - hard) + lambda(sigmoid(z) - soft)] / (frames * classes)
Matrix kd_loss_grad(const Matrix& student_logits, const Matrix& hard, const Matrix& soft,
                    const KdConfig& cfg);
Matrix kd_loss_grad(const ScoreMatrix& student_logits, const TargetMatrix& hard,
                    const EnsembleTargets& soft, const KdConfig& cfg);

// Input features (spectrogram or embedding) with both target kinds.
struct TrainingExample {
  Matrix features;
  Matrix hard;
  Matrix soft;
};

// lam * a + (1 - lam) * b for every component.
TrainingExample mixup_with_targets(const TrainingExample& a, const TrainingExample& b, double lam);

// Numerically stable binary cross-entropy of sigmoid(z) against target y.
double bce_with_logit(double z, double y) noexcept;
double sigmoid(double z) noexcept;

}  // namespace sedkit
