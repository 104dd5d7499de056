#include "sedkit/probe.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sedkit/error.h"
#include "sedkit/random.h"

namespace sedkit {

namespace {

Matrix logits_of(const Matrix& x, const LinearHead& head) {
  Matrix z(x.rows(), head.classes());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    const auto row = x.row(t);
    for (std::size_t c = 0; c < head.classes(); ++c) {
      const auto w = head.weight.row(c);
      double acc = head.bias[c];
      for (std::size_t k = 0; k < row.size(); ++k) acc += w[k] * row[k];
      z(t, c) = acc;
    }
  }
  return z;
}

void check_clips(std::span<const ProbeClip> clips) {
  if (clips.empty()) throw ContractError("probe needs at least one training clip");
  const std::size_t dim = clips.front().embedding.dim();
  const std::size_t classes = clips.front().hard.cols();
  for (const auto& clip : clips) {
    if (clip.embedding.frames() != kCanonicalFrames) {
      throw ContractError("clip '" + clip.embedding.clip_id() + "' has " +
                          std::to_string(clip.embedding.frames()) + " frames; resample to " +
                          std::to_string(kCanonicalFrames) + " first");
    }
    if (clip.embedding.dim() != dim) throw ContractError("embedding dims differ across clips");
    if (clip.hard.rows() != kCanonicalFrames || clip.hard.cols() != classes) {
      throw ContractError("clip '" + clip.embedding.clip_id() + "' targets have the wrong shape");
    }
    if (clip.soft && !clip.soft->same_shape(clip.hard)) {
      throw ContractError("clip '" + clip.embedding.clip_id() + "' soft targets have the wrong shape");
    }
  }
}

}  // namespace

double probe_loss(std::span<const ProbeClip> clips, const LinearHead& head, const KdConfig& kd) {
  double total = 0.0;
  for (const auto& clip : clips) {
    const Matrix z = logits_of(clip.embedding.values(), head);
    total += kd_loss(z, clip.hard, clip.soft ? *clip.soft : clip.hard, kd);
  }
  return total / static_cast<double>(clips.size());
}

ProbeResult probe_fit(std::span<const ProbeClip> train, const ProbeConfig& cfg,
                      std::uint64_t rng_seed) {
  check_clips(train);
  cfg.kd.validate();
  if (cfg.batch_size == 0) throw ContractError("batch size must be positive");
  const std::size_t dim = train.front().embedding.dim();
  const std::size_t classes = train.front().hard.cols();

  ProbeResult result;
  result.head = LinearHead::zeros(classes, dim);
  if (cfg.epochs == 0) {
    result.final_loss = probe_loss(train, result.head, cfg.kd);
    return result;
  }
  cfg.schedule.validate();

  Rng rng = make_rng(rng_seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  LinearHead& head = result.head;
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const auto batch = static_cast<double>(end - begin);

      std::vector<std::size_t> partner(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                       order.begin() + static_cast<std::ptrdiff_t>(end));
      if (cfg.mixup) std::shuffle(partner.begin(), partner.end(), rng);

      Matrix grad_w(classes, dim, 0.0);
      std::vector<double> grad_b(classes, 0.0);
      double batch_loss = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const ProbeClip& a = train[order[i]];
        TrainingExample ex{a.embedding.values(), a.hard, a.soft ? *a.soft : a.hard};
        if (cfg.mixup) {
          const ProbeClip& b = train[partner[i - begin]];
          const double lam = sample_symmetric_beta(rng, cfg.mixup_alpha);
          ex = mixup_with_targets(ex, {b.embedding.values(), b.hard, b.soft ? *b.soft : b.hard}, lam);
        }
        const Matrix z = logits_of(ex.features, head);
        batch_loss += kd_loss(z, ex.hard, ex.soft, cfg.kd);
        const Matrix g = kd_loss_grad(z, ex.hard, ex.soft, cfg.kd);
        for (std::size_t t = 0; t < g.rows(); ++t) {
          const auto x = ex.features.row(t);
          for (std::size_t c = 0; c < classes; ++c) {
            const double gc = g(t, c);
            if (gc == 0.0) continue;
            grad_b[c] += gc;
            auto w = grad_w.row(c);
            for (std::size_t k = 0; k < dim; ++k) w[k] += gc * x[k];
          }
        }
      }
      batch_loss /= batch;
      if (!std::isfinite(batch_loss)) throw TrainingError("probe loss diverged", step);
      result.batch_losses.push_back(batch_loss);

      const double lr = lr_at(cfg.schedule, step);
      for (std::size_t c = 0; c < classes; ++c) {
        head.bias[c] -= lr * grad_b[c] / batch;
        auto w = head.weight.row(c);
        const auto gw = grad_w.row(c);
        for (std::size_t k = 0; k < dim; ++k) w[k] -= lr * gw[k] / batch;
      }
      ++step;
    }
  }
  const auto w = head.weight.data();
  if (!std::all_of(w.begin(), w.end(), [](double v) { return std::isfinite(v); }) ||
      !std::all_of(head.bias.begin(), head.bias.end(), [](double v) { return std::isfinite(v); })) {
    throw TrainingError("probe weights diverged", step);
  }
  result.steps = step;
  result.final_loss = probe_loss(train, head, cfg.kd);
  if (!std::isfinite(result.final_loss)) throw TrainingError("probe loss diverged", step);
  return result;
}

}  // namespace sedkit
