#include "sedkit/aso.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "sedkit/error.h"
#include "sedkit/parallel.h"
#include "sedkit/random.h"

namespace sedkit {

namespace {

double sorted_violation_ratio(std::span<const double> a, std::span<const double> b) {
  // Segment boundaries i/na and j/nb are expressed in units of 1/(na*nb) so
  // they compare exactly.
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const auto total = static_cast<double>(na) * static_cast<double>(nb);
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t pos = 0;
  double violation = 0.0;
  double distance = 0.0;
  while (i < na && j < nb) {
    const std::size_t end_a = (i + 1) * nb;
    const std::size_t end_b = (j + 1) * na;
    const std::size_t next = std::min(end_a, end_b);
    const double width = static_cast<double>(next - pos) / total;
    const double d = b[j] - a[i];
    const double sq = d * d * width;
    distance += sq;
    if (d > 0.0) violation += sq;
    pos = next;
    if (end_a == next) ++i;
    if (end_b == next) ++j;
  }
  if (distance == 0.0) return 0.5;
  return violation / distance;
}

std::vector<double> sorted_copy(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  return v;
}

void check_sample(std::span<const double> x, const char* name) {
  if (x.size() < 2) throw ContractError(std::string("ASO sample ") + name + " needs at least 2 scores");
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite score in ASO sample ") + name);
  }
}

}  // namespace

void AsoConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("ASO alpha must lie in (0, 1)");
  if (num_comparisons == 0) throw ContractError("ASO needs at least one comparison");
  if (bootstrap_samples == 0) throw ContractError("ASO needs at least one bootstrap sample");
}

double violation_ratio(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ContractError("violation ratio needs non-empty samples");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  return sorted_violation_ratio(sa, sb);
}

AsoResult aso(std::span<const double> a, std::span<const double> b, const AsoConfig& cfg) {
  cfg.validate();
  check_sample(a, "a");
  check_sample(b, "b");

  AsoResult result;
  result.violation_ratio = violation_ratio(a, b);

  std::vector<double> boot(cfg.bootstrap_samples);
  parallel_for(cfg.bootstrap_samples, cfg.threads, [&](std::size_t it) {
    Rng rng = make_rng(derive_seed(cfg.rng_seed, it));
    std::uniform_int_distribution<std::size_t> pick_a(0, a.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_b(0, b.size() - 1);
    std::vector<double> ra(a.size());
    std::vector<double> rb(b.size());
    for (auto& v : ra) v = a[pick_a(rng)];
    for (auto& v : rb) v = b[pick_b(rng)];
    std::sort(ra.begin(), ra.end());
    std::sort(rb.begin(), rb.end());
    boot[it] = sorted_violation_ratio(ra, rb);
  });

  double mean = 0.0;
  for (double v : boot) mean += v;
  mean /= static_cast<double>(boot.size());
  double var = 0.0;
  for (double v : boot) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(boot.size()));

  const double level = 1.0 - cfg.alpha / static_cast<double>(cfg.num_comparisons);
  const double z = boost::math::quantile(boost::math::normal(), level);
  result.epsilon_min = std::clamp(result.violation_ratio + z * sd, 0.0, 1.0);
  result.significant = result.epsilon_min < cfg.threshold;
  return result;
}

}  // namespace sedkit
