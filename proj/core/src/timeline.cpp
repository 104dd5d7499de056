#include "sedkit/timeline.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "sedkit/error.h"
#include "sedkit/random.h"

namespace sedkit {

namespace {

constexpr double kSnapFrames = 1e-9;
constexpr double kTimeTolerance = 1e-9;

double snapped_quotient(double seconds, double resolution) {
  const double q = seconds / resolution;
  const double nearest = std::round(q);
  return std::abs(q - nearest) <= kSnapFrames ? nearest : q;
}

void check_same_layout(const ScoreMatrix& a, const ScoreMatrix& b) {
  if (a.vocabulary() != b.vocabulary()) throw ContractError("score matrices use different vocabularies");
  if (!a.grid().same_resolution(b.grid())) throw ContractError("score matrices use different resolutions");
  if (a.kind() != b.kind()) throw ContractError("cannot mix logit and probability matrices");
}

}  // namespace

ClassVocabulary::ClassVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
  index_.reserve(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw VocabularyError("empty class name at index " + std::to_string(i));
    if (!index_.emplace(names_[i], i).second) {
      throw VocabularyError("duplicate class name '" + names_[i] + "'");
    }
  }
}

std::optional<std::size_t> ClassVocabulary::find(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ClassVocabulary::index(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw VocabularyError("unknown class '" + std::string(name) + "'");
}

ClipAnnotations::ClipAnnotations(std::string clip_id, double duration, std::vector<Event> events,
                                 bool clamp)
    : clip_id_(std::move(clip_id)), duration_(duration) {
  if (!(duration_ > 0.0) || !std::isfinite(duration_)) {
    throw ValidationError("clip '" + clip_id_ + "': duration must be positive");
  }
  events_.reserve(events.size());
  for (Event e : events) {
    if (!std::isfinite(e.onset) || !std::isfinite(e.offset)) {
      throw ValidationError("clip '" + clip_id_ + "': non-finite event time");
    }
    if (e.onset < 0.0 || e.offset < 0.0) {
      throw ValidationError("clip '" + clip_id_ + "': negative event time");
    }
    if (!(e.offset > e.onset)) {
      throw ValidationError("clip '" + clip_id_ + "': event offset must exceed onset");
    }
    if (e.offset > duration_ + kTimeTolerance) {
      if (!clamp) {
        throw ValidationError("clip '" + clip_id_ + "': event offset " + std::to_string(e.offset) +
                              " exceeds clip duration " + std::to_string(duration_));
      }
      if (e.onset >= duration_) continue;
      e.offset = duration_;
    }
    events_.push_back(e);
  }
}

std::vector<Event> ClipAnnotations::events_of(std::size_t class_id) const {
  std::vector<Event> out;
  for (const auto& e : events_) {
    if (e.class_id == class_id) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const Event& a, const Event& b) {
    return a.onset < b.onset || (a.onset == b.onset && a.offset < b.offset);
  });
  return out;
}

FrameGrid::FrameGrid(double resolution, std::size_t num_frames)
    : resolution_(resolution), num_frames_(num_frames) {
  if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) {
    throw ContractError("frame resolution must be positive");
  }
}

FrameGrid FrameGrid::covering(double duration, double resolution) {
  if (!(duration > 0.0)) throw ValidationError("clip duration must be positive");
  if (!(resolution > 0.0)) throw ContractError("frame resolution must be positive");
  return FrameGrid(resolution, static_cast<std::size_t>(frame_ceil(duration, resolution)));
}

bool FrameGrid::same_resolution(const FrameGrid& other) const noexcept {
  return std::abs(resolution_ - other.resolution_) <=
         1e-12 * std::max(resolution_, other.resolution_);
}

std::int64_t frame_floor(double seconds, double resolution) {
  return static_cast<std::int64_t>(std::floor(snapped_quotient(seconds, resolution)));
}

std::int64_t frame_ceil(double seconds, double resolution) {
  return static_cast<std::int64_t>(std::ceil(snapped_quotient(seconds, resolution)));
}

TargetMatrix::TargetMatrix(FrameGrid grid, Matrix values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.rows() != grid_.num_frames()) {
    throw SizeError("target rows " + std::to_string(values_.rows()) + " != grid frames " +
                    std::to_string(grid_.num_frames()));
  }
  for (double v : values_.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("target value outside [0, 1]");
  }
}

bool TargetMatrix::is_hard() const {
  const auto data = values_.data();
  return std::all_of(data.begin(), data.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

ScoreMatrix::ScoreMatrix(FrameGrid grid, VocabularyPtr vocabulary, Matrix scores, ScoreKind kind)
    : grid_(grid), vocabulary_(std::move(vocabulary)), scores_(std::move(scores)), kind_(kind) {
  if (!vocabulary_) throw ContractError("score matrix requires a vocabulary");
  if (scores_.rows() != grid_.num_frames()) {
    throw SizeError("score rows " + std::to_string(scores_.rows()) + " != grid frames " +
                    std::to_string(grid_.num_frames()));
  }
  if (scores_.cols() != vocabulary_->size()) {
    throw SizeError("score columns " + std::to_string(scores_.cols()) + " != vocabulary size " +
                    std::to_string(vocabulary_->size()));
  }
  require_finite(scores_, "score matrix");
  if (kind_ == ScoreKind::Probability) {
    for (double v : scores_.data()) {
      if (v < 0.0 || v > 1.0) {
        throw ValidationError("probability score " + std::to_string(v) + " outside [0, 1]");
      }
    }
  }
}

ScoreMatrix ScoreMatrix::sigmoid() const {
  if (kind_ == ScoreKind::Probability) return *this;
  Matrix probs = scores_;
  for (double& v : probs.data()) v = 1.0 / (1.0 + std::exp(-v));
  return ScoreMatrix(grid_, vocabulary_, std::move(probs), ScoreKind::Probability);
}

ScoreMatrix ScoreMatrix::with_scores(Matrix scores) const {
  return ScoreMatrix(grid_.with_frames(scores.rows()), vocabulary_, std::move(scores), kind_);
}

TargetMatrix rasterize_events(const ClipAnnotations& ann, const ClassVocabulary& vocab,
                              const FrameGrid& grid, OverlapRule rule) {
  if (static_cast<std::int64_t>(grid.num_frames()) < frame_ceil(ann.duration(), grid.resolution())) {
    throw ContractError("frame grid does not cover clip '" + ann.clip_id() + "'");
  }
  const double r = grid.resolution();
  const auto frames = static_cast<std::int64_t>(grid.num_frames());
  Matrix values(grid.num_frames(), vocab.size(), 0.0);
  for (const Event& e : ann.events()) {
    if (e.class_id >= vocab.size()) {
      throw VocabularyError("class id " + std::to_string(e.class_id) + " outside vocabulary of size " +
                            std::to_string(vocab.size()));
    }
    const std::int64_t first = std::max<std::int64_t>(0, frame_floor(e.onset, r));
    const std::int64_t last = std::min(frames, frame_ceil(e.offset, r));
    for (std::int64_t t = first; t < last; ++t) {
      const auto ft = static_cast<std::size_t>(t);
      if (rule == OverlapRule::Half) {
        const double overlap =
            std::min(e.offset, grid.frame_end(ft)) - std::max(e.onset, grid.frame_start(ft));
        if (overlap < 0.5 * r - kSnapFrames * r) continue;
      }
      values(ft, e.class_id) = 1.0;
    }
  }
  return TargetMatrix(grid, std::move(values));
}

std::vector<Event> decode_column(std::span<const double> column, double threshold,
                                 double resolution, std::size_t class_id) {
  std::vector<Event> events;
  std::size_t t = 0;
  const std::size_t n = column.size();
  while (t < n) {
    if (column[t] >= threshold) {
      const std::size_t start = t;
      while (t < n && column[t] >= threshold) ++t;
      events.push_back({class_id, resolution * static_cast<double>(start),
                        resolution * static_cast<double>(t)});
    } else {
      ++t;
    }
  }
  return events;
}

std::vector<std::vector<Event>> decode_events(const ScoreMatrix& scores, double threshold,
                                              std::optional<std::span<const std::size_t>> class_subset) {
  if (scores.is_logits()) {
    throw ContractError("decode_events needs probabilities; apply sigmoid to logits first");
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ContractError("decode threshold must lie in (0, 1]");
  }
  const std::size_t classes = scores.num_classes();
  std::vector<std::vector<Event>> out(classes);
  auto decode_one = [&](std::size_t c) {
    if (c >= classes) throw VocabularyError("class id " + std::to_string(c) + " outside vocabulary");
    const auto column = scores.scores().column(c);
    out[c] = decode_column(column, threshold, scores.grid().resolution(), c);
  };
  if (class_subset) {
    for (std::size_t c : *class_subset) decode_one(c);
  } else {
    for (std::size_t c = 0; c < classes; ++c) decode_one(c);
  }
  return out;
}

std::vector<std::size_t> projection_columns(const ClassVocabulary& from, const ClassVocabulary& to) {
  std::vector<std::size_t> cols;
  cols.reserve(to.size());
  for (const auto& name : to.names()) {
    const auto id = from.find(name);
    if (!id) throw VocabularyError("class '" + name + "' missing from source vocabulary");
    cols.push_back(*id);
  }
  return cols;
}

namespace {

Matrix select_columns(const Matrix& m, std::span<const std::size_t> cols) {
  Matrix out(m.rows(), cols.size());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(r, j) = m(r, cols[j]);
  }
  return out;
}

}  // namespace

TargetMatrix project_vocabulary(const TargetMatrix& m, const ClassVocabulary& from,
                                const ClassVocabulary& to) {
  if (m.num_classes() != from.size()) throw SizeError("target columns do not match source vocabulary");
  const auto cols = projection_columns(from, to);
  return TargetMatrix(m.grid(), select_columns(m.values(), cols));
}

ScoreMatrix project_vocabulary(const ScoreMatrix& m, const VocabularyPtr& to) {
  if (!to) throw ContractError("target vocabulary is null");
  const auto cols = projection_columns(m.vocabulary(), *to);
  return ScoreMatrix(m.grid(), to, select_columns(m.scores(), cols), m.kind());
}

std::size_t crop_start(std::size_t num_frames, std::size_t length, std::uint64_t rng_seed) {
  if (length > num_frames) {
    throw SizeError("crop length " + std::to_string(length) + " exceeds " +
                    std::to_string(num_frames) + " frames");
  }
  Rng rng = make_rng(rng_seed);
  std::uniform_int_distribution<std::size_t> dist(0, num_frames - length);
  return dist(rng);
}

ScoreMatrix crop_random(const ScoreMatrix& m, std::size_t length_frames, std::uint64_t rng_seed) {
  const std::size_t start = crop_start(m.num_frames(), length_frames, rng_seed);
  return m.with_scores(m.scores().slice_rows(start, length_frames));
}

TargetMatrix crop_random(const TargetMatrix& m, std::size_t length_frames, std::uint64_t rng_seed) {
  const std::size_t start = crop_start(m.num_frames(), length_frames, rng_seed);
  return TargetMatrix(m.grid().with_frames(length_frames),
                      m.values().slice_rows(start, length_frames));
}

ScoreMatrix concat_slices(std::span<const ScoreMatrix> slices) {
  if (slices.empty()) throw ContractError("concat_slices needs at least one slice");
  const ScoreMatrix& first = slices.front();
  std::size_t total = 0;
  for (const auto& s : slices) {
    check_same_layout(first, s);
    total += s.num_frames();
  }
  std::vector<double> data;
  data.reserve(total * first.num_classes());
  for (const auto& s : slices) {
    const auto d = s.scores().data();
    data.insert(data.end(), d.begin(), d.end());
  }
  return first.with_scores(Matrix(total, first.num_classes(), std::move(data)));
}

double union_length(std::vector<Event> events) {
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.onset < b.onset; });
  double total = 0.0;
  bool open = false;
  double start = 0.0;
  double end = 0.0;
  for (const auto& e : events) {
    if (open && e.onset <= end) {
      end = std::max(end, e.offset);
      continue;
    }
    if (open) total += end - start;
    start = e.onset;
    end = e.offset;
    open = true;
  }
  if (open) total += end - start;
  return total;
}

}  // namespace sedkit
