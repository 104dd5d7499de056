#include "sedkit/sampling.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sedkit/error.h"
#include "sedkit/random.h"

namespace sedkit {

std::vector<double> label_frequencies(std::span<const ClipAnnotations> dataset,
                                      const ClassVocabulary& vocab) {
  if (dataset.empty()) throw ValidationError("label_frequencies needs a non-empty dataset");
  std::vector<double> seconds(vocab.size(), 0.0);
  std::vector<std::vector<Event>> per_class(vocab.size());
  for (const auto& clip : dataset) {
    for (auto& list : per_class) list.clear();
    for (const auto& e : clip.events()) {
      if (e.class_id >= vocab.size()) {
        throw VocabularyError("class id " + std::to_string(e.class_id) + " outside vocabulary");
      }
      per_class[e.class_id].push_back(e);
    }
    for (std::size_t c = 0; c < per_class.size(); ++c) {
      if (!per_class[c].empty()) seconds[c] += union_length(per_class[c]);
    }
  }
  return seconds;
}

SamplingWeights::SamplingWeights(std::vector<std::string> clip_ids, std::vector<double> weights)
    : clip_ids_(std::move(clip_ids)), weights_(std::move(weights)) {
  if (clip_ids_.size() != weights_.size()) throw ContractError("clip ids and weights differ in length");
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("sampling weights must be positive");
  }
}

SamplingWeights SamplingWeights::normalized() const {
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  std::vector<double> w(weights_.size());
  std::transform(weights_.begin(), weights_.end(), w.begin(), [&](double x) { return x / total; });
  return SamplingWeights(clip_ids_, std::move(w));
}

SamplingWeights sampling_weights(std::span<const ClipAnnotations> dataset,
                                 const ClassVocabulary& vocab, const WeightOptions& options) {
  const auto freq = label_frequencies(dataset, vocab);
  std::vector<std::string> ids;
  std::vector<double> raw;
  std::vector<std::string> unlabeled;
  for (const auto& clip : dataset) {
    std::vector<std::size_t> labels;
    for (const auto& e : clip.events()) labels.push_back(e.class_id);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    double w = 0.0;
    std::size_t used = 0;
    for (std::size_t c : labels) {
      if (freq[c] > 0.0) {
        w += 1.0 / freq[c];
        ++used;
      }
    }
    if (used == 0) {
      unlabeled.push_back(clip.clip_id());
      continue;
    }
    if (options.aggregate == LabelAggregate::Mean) w /= static_cast<double>(used);
    ids.push_back(clip.clip_id());
    raw.push_back(w);
  }
  if (raw.empty()) throw ValidationError("no clip carries a label with positive active time");
  if (options.unlabeled == UnlabeledPolicy::MinimumWeight && !unlabeled.empty()) {
    const double floor = *std::min_element(raw.begin(), raw.end());
    for (auto& id : unlabeled) {
      ids.push_back(std::move(id));
      raw.push_back(floor);
    }
  }
  return SamplingWeights(std::move(ids), std::move(raw)).normalized();
}

AliasTable::AliasTable(std::span<const double> weights)
    : prob_(weights.size(), 0.0), alias_(weights.size(), 0) {
  if (weights.empty()) throw ContractError("alias table needs at least one weight");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) throw ContractError("alias table weights must sum to a positive value");
  const auto n = static_cast<double>(weights.size());
  std::vector<double> scaled(weights.size());
  std::vector<std::size_t> small;
  std::vector<std::size_t> large;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) throw ContractError("alias table weights must be non-negative");
    scaled[i] = weights[i] * n / total;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (std::size_t i : large) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
  for (std::size_t i : small) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
}

std::vector<std::size_t> weighted_sample_indices(const SamplingWeights& weights, std::size_t n,
                                                 std::uint64_t rng_seed) {
  if (n == 0) return {};
  if (weights.empty()) throw ContractError("cannot sample from empty weights");
  const AliasTable table(weights.weights());
  Rng rng = make_rng(rng_seed);
  std::vector<std::size_t> out(n);
  for (auto& idx : out) idx = table.draw(rng);
  return out;
}

std::vector<std::string> weighted_sample(const SamplingWeights& weights, std::size_t n,
                                         std::uint64_t rng_seed) {
  const auto idx = weighted_sample_indices(weights, n, rng_seed);
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(weights.clip_ids()[i]);
  return out;
}

}  // namespace sedkit
