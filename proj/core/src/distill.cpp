#include "sedkit/distill.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sedkit/error.h"

namespace sedkit {

namespace {

void check_loss_inputs(const Matrix& z, const Matrix& hard, const Matrix& soft) {
  if (!z.same_shape(hard) || !z.same_shape(soft)) {
    throw ContractError("kd loss inputs differ in shape");
  }
  if (z.empty()) throw ContractError("kd loss on empty matrix");
  for (const Matrix* m : {&z, &hard, &soft}) {
    for (double v : m->data()) {
      if (std::isnan(v)) throw NumericError("NaN in kd loss input");
    }
  }
}

Matrix blend(const Matrix& a, const Matrix& b, double lam) {
  Matrix out(a.rows(), a.cols());
  const auto da = a.data();
  const auto db = b.data();
  auto dout = out.data();
  for (std::size_t i = 0; i < dout.size(); ++i) dout[i] = lam * da[i] + (1.0 - lam) * db[i];
  return out;
}

}  // namespace

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

double bce_with_logit(double z, double y) noexcept {
  // -[y ln s(z) + (1 - y) ln(1 - s(z))] = max(z, 0) - z*y + ln(1 + e^-|z|)
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

EnsembleTargets::EnsembleTargets(const ScoreMatrix& averaged_logits) {
  if (!averaged_logits.is_logits()) {
    throw ContractError("ensemble targets are built from averaged logits");
  }
  constexpr double lo = std::numeric_limits<double>::denorm_min();
  const double hi = std::nextafter(1.0, 0.0);
  Matrix probs = averaged_logits.scores();
  for (double& v : probs.data()) v = std::clamp(sigmoid(v), lo, hi);
  targets_ = TargetMatrix(averaged_logits.grid(), std::move(probs));
}

ScoreMatrix ensemble_average(std::span<const ScoreMatrix> logit_sets) {
  if (logit_sets.empty()) throw ContractError("ensemble_average needs at least one member");
  const ScoreMatrix& first = logit_sets.front();
  for (const auto& m : logit_sets) {
    if (!m.is_logits()) throw ContractError("ensemble members must be logits");
    if (!m.scores().same_shape(first.scores())) throw ContractError("ensemble members differ in shape");
    if (m.vocabulary() != first.vocabulary()) throw ContractError("ensemble members differ in vocabulary");
    if (!m.grid().same_resolution(first.grid())) throw ContractError("ensemble members differ in grid");
  }
  Matrix sum(first.num_frames(), first.num_classes(), 0.0);
  auto acc = sum.data();
  for (const auto& m : logit_sets) {
    const auto d = m.scores().data();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i];
  }
  const auto n = static_cast<double>(logit_sets.size());
  for (double& v : acc) v /= n;
  return first.with_scores(std::move(sum));
}

void KdConfig::validate() const {
  if (!(lambda_kd >= 0.0 && lambda_kd <= 1.0)) throw ContractError("lambda_kd must lie in [0, 1]");
}

double kd_loss(const Matrix& student_logits, const Matrix& hard, const Matrix& soft,
               const KdConfig& cfg) {
  cfg.validate();
  check_loss_inputs(student_logits, hard, soft);
  const auto z = student_logits.data();
  const auto h = hard.data();
  const auto s = soft.data();
  double supervised = 0.0;
  double distill = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    supervised += bce_with_logit(z[i], h[i]);
    distill += bce_with_logit(z[i], s[i]);
  }
  const auto n = static_cast<double>(z.size());
  return (1.0 - cfg.lambda_kd) * (supervised / n) + cfg.lambda_kd * (distill / n);
}

double kd_loss(const ScoreMatrix& student_logits, const TargetMatrix& hard,
               const EnsembleTargets& soft, const KdConfig& cfg) {
  if (!student_logits.is_logits()) throw ContractError("kd_loss expects student logits");
  return kd_loss(student_logits.scores(), hard.values(), soft.values(), cfg);
}

Matrix kd_loss_grad(const Matrix& student_logits, const Matrix& hard, const Matrix& soft,
                    const KdConfig& cfg) {
  cfg.validate();
  check_loss_inputs(student_logits, hard, soft);
  Matrix grad(student_logits.rows(), student_logits.cols());
  const auto z = student_logits.data();
  const auto h = hard.data();
  const auto s = soft.data();
  auto g = grad.data();
  const auto n = static_cast<double>(z.size());
  const double lam = cfg.lambda_kd;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double p = sigmoid(z[i]);
    g[i] = ((1.0 - lam) * (p - h[i]) + lam * (p - s[i])) / n;
  }
  return grad;
}

Matrix kd_loss_grad(const ScoreMatrix& student_logits, const TargetMatrix& hard,
                    const EnsembleTargets& soft, const KdConfig& cfg) {
  if (!student_logits.is_logits()) throw ContractError("kd_loss_grad expects student logits");
  return kd_loss_grad(student_logits.scores(), hard.values(), soft.values(), cfg);
}

TrainingExample mixup_with_targets(const TrainingExample& a, const TrainingExample& b, double lam) {
  if (!(lam >= 0.0 && lam <= 1.0)) throw ContractError("mixup coefficient must lie in [0, 1]");
  if (!a.features.same_shape(b.features) || !a.hard.same_shape(b.hard) ||
      !a.soft.same_shape(b.soft)) {
    throw ContractError("mixup inputs differ in shape");
  }
  if (lam == 1.0) return a;
  if (lam == 0.0) return b;
  return {blend(a.features, b.features, lam), blend(a.hard, b.hard, lam),
          blend(a.soft, b.soft, lam)};
}

}  // namespace sedkit
