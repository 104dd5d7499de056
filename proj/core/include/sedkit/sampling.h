#pragma once

// Class-balanced clip sampling from inverse label active time.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sedkit/timeline.h"

namespace sedkit {

// Seconds of activity per class: for every clip, the length of the union of
// that class's events, summed over the dataset. Classes that never occur get 0.
std::vector<double> label_frequencies(std::span<const ClipAnnotations> dataset,
                                      const ClassVocabulary& vocab);

class SamplingWeights {
 public:
  SamplingWeights() = default;
  // Weights must be positive and finite; throws ValidationError otherwise.
  SamplingWeights(std::vector<std::string> clip_ids, std::vector<double> weights);

  const std::vector<std::string>& clip_ids() const noexcept { return clip_ids_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return weights_.size(); }
  bool empty() const noexcept { return weights_.empty(); }

  // Returns a copy whose weights sum to 1.
  SamplingWeights normalized() const;

 private:
  std::vector<std::string> clip_ids_;
  std::vector<double> weights_;
};

enum class LabelAggregate { Sum, Mean };
enum class UnlabeledPolicy { Skip, MinimumWeight };

struct WeightOptions {
  LabelAggregate aggregate = LabelAggregate::Sum;
  UnlabeledPolicy unlabeled = UnlabeledPolicy::Skip;
};

// weight(clip) = aggregate over the clip's distinct labels of 1 / frequency,
// normalized to a probability distribution. Throws ValidationError on an empty
// dataset or when no clip carries a label.
SamplingWeights sampling_weights(std::span<const ClipAnnotations> dataset,
                                 const ClassVocabulary& vocab, const WeightOptions& options = {});

// Walker/Vose alias table: O(K) construction, O(1) per draw.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights);

  template <class Generator>
  std::size_t draw(Generator& rng) const {
    std::uniform_int_distribution<std::size_t> column(0, prob_.size() - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const std::size_t k = column(rng);
    return coin(rng) < prob_[k] ? k : alias_[k];
  }

  std::size_t size() const noexcept { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

// n independent draws with replacement, P(clip) = normalized weight.
std::vector<std::string> weighted_sample(const SamplingWeights& weights, std::size_t n,
                                         std::uint64_t rng_seed);
// Same draws as indices into weights.clip_ids().
std::vector<std::size_t> weighted_sample_indices(const SamplingWeights& weights, std::size_t n,
                                                 std::uint64_t rng_seed);

}  // namespace sedkit
