#pragma once

// Almost Stochastic Order test between two score samples.

#include <cstddef>
#include <cstdint>
#include <span>

namespace sedkit {

struct AsoConfig {
  double alpha = 0.05;              // confidence level before correction
  std::size_t num_comparisons = 1;  // Bonferroni divisor
  std::size_t bootstrap_samples = 1000;
  double threshold = 0.2;           // epsilon_min below this counts as significant
  std::uint64_t rng_seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

struct AsoResult {
  double violation_ratio = 0.0;  // point estimate on the observed samples
  double epsilon_min = 0.0;      // bootstrap upper confidence bound, in [0, 1]
  bool significant = false;      // epsilon_min < threshold: a almost dominates b
};

// Share of the squared quantile distance where b's quantile function lies
// above a's:  int max(Q_b - Q_a, 0)^2 dt / int (Q_a - Q_b)^2 dt, integrated
// exactly over the empirical step functions. 0.5 when the quantile functions
// coincide.
double violation_ratio(std::span<const double> a, std::span<const double> b);

// Bootstrap (both samples resampled with replacement) standard deviation of
// the violation ratio, turned into a one-sided normal upper bound at level
// 1 - alpha / num_comparisons. Iteration i uses generator stream i of the
// seed, so the result does not depend on cfg.threads.
AsoResult aso(std::span<const double> a, std::span<const double> b, const AsoConfig& cfg = {});

}  // namespace sedkit
