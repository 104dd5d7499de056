#pragma once

// Clips, class vocabularies, strong-label events and frame grids, plus the
// conversions between event lists and frame rasters.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sedkit/matrix.h"

namespace sedkit {

// Canonical frame length: predictions and targets are aligned to 40 ms.
inline constexpr double kDefaultResolution = 0.04;
// Frames of a 10 s clip on the canonical grid.
inline constexpr std::size_t kCanonicalFrames = 250;

class ClassVocabulary {
 public:
  ClassVocabulary() = default;
  // Throws VocabularyError on empty or duplicate names.
  explicit ClassVocabulary(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t id) const { return names_.at(id); }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws VocabularyError naming the class when absent.
  std::size_t index(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }

  friend bool operator==(const ClassVocabulary& a, const ClassVocabulary& b) {
    return a.names_ == b.names_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

using VocabularyPtr = std::shared_ptr<const ClassVocabulary>;

inline VocabularyPtr make_vocabulary(std::vector<std::string> names) {
  return std::make_shared<const ClassVocabulary>(std::move(names));
}

struct Event {
  std::size_t class_id = 0;
  double onset = 0.0;   // seconds
  double offset = 0.0;  // seconds, > onset

  friend bool operator==(const Event&, const Event&) = default;
};

class ClipAnnotations {
 public:
  // Validates every event: onset >= 0, offset > onset, offset <= duration.
  // With `clamp` set, offsets past the clip end are clamped to the duration and
  // events that start at or after the end are dropped; otherwise they throw
  // ValidationError.
  ClipAnnotations(std::string clip_id, double duration, std::vector<Event> events,
                  bool clamp = false);

  const std::string& clip_id() const noexcept { return clip_id_; }
  double duration() const noexcept { return duration_; }
  const std::vector<Event>& events() const noexcept { return events_; }

  // Events of a single class, sorted by onset.
  std::vector<Event> events_of(std::size_t class_id) const;

 private:
  std::string clip_id_;
  double duration_;
  std::vector<Event> events_;
};

// Frame t covers [t * resolution, (t + 1) * resolution).
class FrameGrid {
 public:
  FrameGrid() = default;
  FrameGrid(double resolution, std::size_t num_frames);

  // Smallest grid that covers `duration` seconds.
  static FrameGrid covering(double duration, double resolution = kDefaultResolution);

  double resolution() const noexcept { return resolution_; }
  std::size_t num_frames() const noexcept { return num_frames_; }
  double duration() const noexcept { return resolution_ * static_cast<double>(num_frames_); }
  double frame_start(std::size_t t) const noexcept {
    return resolution_ * static_cast<double>(t);
  }
  double frame_end(std::size_t t) const noexcept {
    return resolution_ * static_cast<double>(t + 1);
  }

  FrameGrid with_frames(std::size_t n) const { return FrameGrid(resolution_, n); }
  bool same_resolution(const FrameGrid& other) const noexcept;

  friend bool operator==(const FrameGrid&, const FrameGrid&) = default;

 private:
  double resolution_ = kDefaultResolution;
  std::size_t num_frames_ = 0;
};

// floor / ceil of seconds / resolution. Quotients within 1e-9 frames of an
// integer snap to it, so boundaries such as 0.12 s on a 0.04 s grid land on
// frame 3 rather than 2.9999999999999996.
std::int64_t frame_floor(double seconds, double resolution);
std::int64_t frame_ceil(double seconds, double resolution);

// Per-frame, per-class activity in [0, 1]. Hard targets are exactly 0 or 1.
class TargetMatrix {
 public:
  TargetMatrix() = default;
  TargetMatrix(FrameGrid grid, Matrix values);

  const FrameGrid& grid() const noexcept { return grid_; }
  const Matrix& values() const noexcept { return values_; }
  std::size_t num_frames() const noexcept { return values_.rows(); }
  std::size_t num_classes() const noexcept { return values_.cols(); }
  bool is_hard() const;

  friend bool operator==(const TargetMatrix&, const TargetMatrix&) = default;

 private:
  FrameGrid grid_;
  Matrix values_;
};

enum class ScoreKind { Probability, Logit };

class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  // Probability-kind scores must lie in [0, 1]; both kinds must be finite.
  ScoreMatrix(FrameGrid grid, VocabularyPtr vocabulary, Matrix scores,
              ScoreKind kind = ScoreKind::Probability);

  const FrameGrid& grid() const noexcept { return grid_; }
  const ClassVocabulary& vocabulary() const noexcept { return *vocabulary_; }
  const VocabularyPtr& vocabulary_ptr() const noexcept { return vocabulary_; }
  const Matrix& scores() const noexcept { return scores_; }
  ScoreKind kind() const noexcept { return kind_; }
  bool is_logits() const noexcept { return kind_ == ScoreKind::Logit; }
  std::size_t num_frames() const noexcept { return scores_.rows(); }
  std::size_t num_classes() const noexcept { return scores_.cols(); }

  // Elementwise logistic sigmoid; returns a probability-kind copy.
  ScoreMatrix sigmoid() const;
  ScoreMatrix with_scores(Matrix scores) const;

 private:
  FrameGrid grid_;
  VocabularyPtr vocabulary_;
  Matrix scores_;
  ScoreKind kind_ = ScoreKind::Probability;
};

enum class OverlapRule {
  Any,   // any strictly positive overlap activates a frame
  Half,  // overlap must cover at least half the frame
};

TargetMatrix rasterize_events(const ClipAnnotations& ann, const ClassVocabulary& vocab,
                              const FrameGrid& grid, OverlapRule rule = OverlapRule::Any);

// Maximal runs of frames with score >= threshold in one score column.
std::vector<Event> decode_column(std::span<const double> column, double threshold,
                                 double resolution, std::size_t class_id);

// One event list per vocabulary class (classes outside `class_subset` stay
// empty). Events are disjoint and sorted by onset within each class.
std::vector<std::vector<Event>> decode_events(
    const ScoreMatrix& scores, double threshold,
    std::optional<std::span<const std::size_t>> class_subset = std::nullopt);

// Column indices of `to` names inside `from`. Throws VocabularyError for a
// name missing from `from`.
std::vector<std::size_t> projection_columns(const ClassVocabulary& from,
                                            const ClassVocabulary& to);

TargetMatrix project_vocabulary(const TargetMatrix& m, const ClassVocabulary& from,
                                const ClassVocabulary& to);
ScoreMatrix project_vocabulary(const ScoreMatrix& m, const VocabularyPtr& to);

// Uniform start index in [0, num_frames - length] drawn from `rng_seed`.
// Throws SizeError when length > num_frames.
std::size_t crop_start(std::size_t num_frames, std::size_t length, std::uint64_t rng_seed);

ScoreMatrix crop_random(const ScoreMatrix& m, std::size_t length_frames, std::uint64_t rng_seed);
TargetMatrix crop_random(const TargetMatrix& m, std::size_t length_frames,
                         std::uint64_t rng_seed);

// Frames concatenated in order; slices must share vocabulary, resolution and kind.
ScoreMatrix concat_slices(std::span<const ScoreMatrix> slices);

// Duration (seconds) of the union of the intervals.
double union_length(std::vector<Event> events);

}  // namespace sedkit
