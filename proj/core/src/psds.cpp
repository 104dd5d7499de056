#include "sedkit/psds.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

#include "sedkit/error.h"
#include "sedkit/median_filter.h"
#include "sedkit/parallel.h"

namespace sedkit {

namespace {

constexpr double kSecondsPerHour = 3600.0;

struct TickInterval {
  std::int64_t begin;
  std::int64_t end;
};

std::int64_t overlap(std::int64_t a0, std::int64_t a1, std::int64_t b0, std::int64_t b1) {
  return std::max<std::int64_t>(0, std::min(a1, b1) - std::max(a0, b0));
}

bool meets_ratio(std::int64_t part, std::int64_t whole, double rho) {
  return static_cast<double>(part) / static_cast<double>(whole) >= rho;
}

TickInterval ticks_of(const Event& e) {
  TickInterval t{to_ticks(e.onset), to_ticks(e.offset)};
  if (t.end <= t.begin) throw ValidationError("event shorter than one microsecond");
  return t;
}

// Scores after validation and optional median filtering, plus per-clip
// ground truth, shared read-only by the per-class sweeps.
struct PreparedDataset {
  std::vector<const ScoreMatrix*> clips;
  std::vector<ScoreMatrix> filtered;  // owns median-filtered copies
  std::vector<std::vector<TickInterval>> gt_by_clip_class;  // [clip * C + c]
  std::vector<std::size_t> gt_per_class;
  std::size_t num_classes = 0;
  double resolution = 0.0;
  double duration_hours = 0.0;

  std::span<const TickInterval> ground_truth(std::size_t clip, std::size_t c) const {
    return gt_by_clip_class[clip * num_classes + c];
  }
};

PreparedDataset prepare(std::span<const ClipScores> scores, const GroundTruth& ground_truth,
                        const PsdsParams& params) {
  params.validate();
  if (scores.empty()) throw ValidationError("PSDS needs at least one clip of scores");
  PreparedDataset p;
  const ScoreMatrix& first = scores.front().scores;
  p.num_classes = first.num_classes();
  p.resolution = first.grid().resolution();

  std::map<std::string, std::size_t> clip_index;
  double seconds = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const ScoreMatrix& m = scores[k].scores;
    if (m.is_logits()) throw ContractError("PSDS needs probabilities; clip '" + scores[k].clip_id + "' holds logits");
    if (m.vocabulary() != first.vocabulary()) throw VocabularyError("clip '" + scores[k].clip_id + "' uses a different vocabulary");
    if (!m.grid().same_resolution(first.grid())) throw ContractError("clip '" + scores[k].clip_id + "' uses a different frame resolution");
    if (!clip_index.emplace(scores[k].clip_id, k).second) throw ValidationError("duplicate clip '" + scores[k].clip_id + "'");
    seconds += m.grid().duration();
  }
  if (!(seconds > 0.0)) throw ValidationError("dataset duration is zero");
  p.duration_hours = seconds / kSecondsPerHour;

  if (params.median_filter_seconds) {
    p.filtered.reserve(scores.size());
    for (const auto& clip : scores) p.filtered.push_back(median_filter(clip.scores, *params.median_filter_seconds));
    for (const auto& m : p.filtered) p.clips.push_back(&m);
  } else {
    for (const auto& clip : scores) p.clips.push_back(&clip.scores);
  }

  p.gt_by_clip_class.resize(scores.size() * p.num_classes);
  p.gt_per_class.assign(p.num_classes, 0);
  for (const auto& [clip_id, events] : ground_truth) {
    const auto it = clip_index.find(clip_id);
    if (it == clip_index.end()) {
      if (events.empty()) continue;
      throw ValidationError("ground-truth clip '" + clip_id + "' has no scores");
    }
    for (const Event& e : events) {
      if (e.class_id >= p.num_classes) {
        throw VocabularyError("ground-truth class id " + std::to_string(e.class_id) + " outside vocabulary");
      }
      p.gt_by_clip_class[it->second * p.num_classes + e.class_id].push_back(ticks_of(e));
      ++p.gt_per_class[e.class_id];
    }
  }
  return p;
}

std::vector<OperatingPoint> sweep_class(const PreparedDataset& p, std::size_t c,
                                        const PsdsParams& params) {
  const std::size_t num_clips = p.clips.size();

  // Flat per-frame layout: clip k owns frames [frame_offset[k], frame_offset[k+1]).
  std::vector<std::size_t> frame_offset(num_clips + 1, 0);
  for (std::size_t k = 0; k < num_clips; ++k) {
    frame_offset[k + 1] = frame_offset[k] + p.clips[k]->num_frames();
  }
  const std::size_t total_frames = frame_offset[num_clips];

  struct Entry {
    double score;
    std::uint32_t clip;
    std::uint32_t frame;
  };
  std::vector<Entry> entries;
  entries.reserve(total_frames);
  for (std::size_t k = 0; k < num_clips; ++k) {
    const Matrix& m = p.clips[k]->scores();
    for (std::size_t t = 0; t < m.rows(); ++t) {
      const double s = m(t, c);
      if (s > 0.0) entries.push_back({s, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(t)});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.clip != b.clip) return a.clip < b.clip;
    return a.frame < b.frame;
  });

  // Frame boundary ticks (num_frames + 1 per clip) and prefix sums of the
  // ground-truth overlap per frame.
  std::vector<std::int64_t> bound(total_frames + num_clips);
  std::vector<std::int64_t> gt_prefix(total_frames + num_clips, 0);
  std::vector<std::size_t> bound_offset(num_clips);
  std::vector<std::size_t> gt_offset(num_clips + 1, 0);
  for (std::size_t k = 0; k < num_clips; ++k) {
    const std::size_t base = frame_offset[k] + k;
    bound_offset[k] = base;
    const std::size_t frames = p.clips[k]->num_frames();
    for (std::size_t t = 0; t <= frames; ++t) bound[base + t] = to_ticks(p.resolution * static_cast<double>(t));
    const auto gts = p.ground_truth(k, c);
    gt_offset[k + 1] = gt_offset[k] + gts.size();
    for (std::size_t t = 0; t < frames; ++t) {
      std::int64_t acc = 0;
      for (const auto& g : gts) acc += overlap(bound[base + t], bound[base + t + 1], g.begin, g.end);
      gt_prefix[base + t + 1] = gt_prefix[base + t] + acc;
    }
  }
  const std::size_t num_gt = gt_offset[num_clips];
  std::vector<std::int64_t> coverage(num_gt, 0);
  std::vector<std::uint8_t> detected(num_gt, 0);

  std::vector<std::uint8_t> active(total_frames, 0);
  std::vector<std::uint32_t> end_of_run(total_frames, 0);    // at run start: exclusive end
  std::vector<std::uint32_t> start_of_run(total_frames, 0);  // at run end - 1: start

  std::size_t tp = 0;
  std::size_t fp = 0;

  // sign = +1 adds run [a, b) of clip k, -1 removes it.
  auto apply_run = [&](std::size_t k, std::size_t a, std::size_t b, int sign) {
    const std::size_t base = bound_offset[k];
    const std::int64_t d0 = bound[base + a];
    const std::int64_t d1 = bound[base + b];
    const std::int64_t hit = gt_prefix[base + b] - gt_prefix[base + a];
    if (!meets_ratio(hit, d1 - d0, params.rho_dtc)) {
      fp = sign > 0 ? fp + 1 : fp - 1;
      return;
    }
    const auto gts = p.ground_truth(k, c);
    for (std::size_t i = 0; i < gts.size(); ++i) {
      const std::int64_t ov = overlap(d0, d1, gts[i].begin, gts[i].end);
      if (ov == 0) continue;
      const std::size_t gi = gt_offset[k] + i;
      coverage[gi] += sign * ov;
      const std::uint8_t now = meets_ratio(coverage[gi], gts[i].end - gts[i].begin, params.rho_gtc) ? 1 : 0;
      if (now != detected[gi]) {
        tp = now ? tp + 1 : tp - 1;
        detected[gi] = now;
      }
    }
  };

  std::vector<OperatingPoint> points;
  points.push_back(OperatingPoint{});
  std::size_t i = 0;
  while (i < entries.size()) {
    const double threshold = entries[i].score;
    for (; i < entries.size() && entries[i].score == threshold; ++i) {
      const std::size_t k = entries[i].clip;
      const std::size_t t = entries[i].frame;
      const std::size_t off = frame_offset[k];
      const std::size_t frames = p.clips[k]->num_frames();
      std::size_t a = t;
      std::size_t b = t + 1;
      if (t > 0 && active[off + t - 1]) {
        a = start_of_run[off + t - 1];
        apply_run(k, a, t, -1);
      }
      if (t + 1 < frames && active[off + t + 1]) {
        b = end_of_run[off + t + 1];
        apply_run(k, t + 1, b, -1);
      }
      active[off + t] = 1;
      end_of_run[off + a] = static_cast<std::uint32_t>(b);
      start_of_run[off + b - 1] = static_cast<std::uint32_t>(a);
      apply_run(k, a, b, +1);
    }
    OperatingPoint pt;
    pt.threshold = threshold;
    pt.tp = tp;
    pt.fp = fp;
    points.push_back(pt);
  }

  const std::size_t class_gt = p.gt_per_class[c];
  for (auto& pt : points) {
    pt.tpr = class_gt > 0 ? static_cast<double>(pt.tp) / static_cast<double>(class_gt) : 1.0;
    pt.efpr = static_cast<double>(pt.fp) / p.duration_hours;
  }
  return points;
}

}  // namespace

void PsdsParams::validate() const {
  if (!(rho_dtc > 0.0 && rho_dtc <= 1.0)) throw ContractError("rho_dtc must lie in (0, 1]");
  if (!(rho_gtc > 0.0 && rho_gtc <= 1.0)) throw ContractError("rho_gtc must lie in (0, 1]");
  if (!(alpha_st >= 0.0) || !std::isfinite(alpha_st)) throw ContractError("alpha_st must be non-negative");
  if (!(e_max > 0.0) || !std::isfinite(e_max)) throw ContractError("e_max must be positive");
  if (median_filter_seconds && !(*median_filter_seconds > 0.0)) {
    throw ContractError("median filter window must be positive");
  }
}

MatchCounts intersection_match(std::span<const Event> detections,
                               std::span<const Event> ground_truths, double rho_dtc,
                               double rho_gtc) {
  std::vector<TickInterval> det;
  std::vector<TickInterval> gt;
  for (const auto& e : detections) det.push_back(ticks_of(e));
  for (const auto& e : ground_truths) gt.push_back(ticks_of(e));

  MatchCounts counts;
  std::vector<std::int64_t> coverage(gt.size(), 0);
  for (const auto& d : det) {
    std::int64_t hit = 0;
    for (const auto& g : gt) hit += overlap(d.begin, d.end, g.begin, g.end);
    if (!meets_ratio(hit, d.end - d.begin, rho_dtc)) {
      ++counts.fp;
      continue;
    }
    for (std::size_t i = 0; i < gt.size(); ++i) {
      coverage[i] += overlap(d.begin, d.end, gt[i].begin, gt[i].end);
    }
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (meets_ratio(coverage[i], gt[i].end - gt[i].begin, rho_gtc)) ++counts.tp;
  }
  return counts;
}

std::vector<double> change_point_thresholds(std::span<const ClipScores> scores,
                                            std::size_t class_id) {
  std::vector<double> values;
  for (const auto& clip : scores) {
    if (class_id >= clip.scores.num_classes()) throw VocabularyError("class id outside vocabulary");
    const Matrix& m = clip.scores.scores();
    for (std::size_t t = 0; t < m.rows(); ++t) {
      if (m(t, class_id) > 0.0) values.push_back(m(t, class_id));
    }
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

std::vector<OperatingPoint> operating_points(std::span<const ClipScores> scores,
                                             const GroundTruth& ground_truth,
                                             std::size_t class_id, const PsdsParams& params) {
  const PreparedDataset p = prepare(scores, ground_truth, params);
  if (class_id >= p.num_classes) throw VocabularyError("class id outside vocabulary");
  return sweep_class(p, class_id, params);
}

std::vector<OperatingPoint> roc_staircase(std::vector<OperatingPoint> points) {
  std::sort(points.begin(), points.end(), [](const OperatingPoint& a, const OperatingPoint& b) {
    if (a.efpr != b.efpr) return a.efpr < b.efpr;
    if (a.tpr != b.tpr) return a.tpr > b.tpr;
    return a.threshold > b.threshold;
  });
  std::vector<OperatingPoint> stairs;
  for (const auto& pt : points) {
    if (stairs.empty() || pt.tpr > stairs.back().tpr) stairs.push_back(pt);
  }
  return stairs;
}

std::vector<OperatingPoint> per_class_roc(std::span<const ClipScores> scores,
                                          const GroundTruth& ground_truth, std::size_t class_id,
                                          const PsdsParams& params) {
  return roc_staircase(operating_points(scores, ground_truth, class_id, params));
}

double psds_from_curves(std::span<const std::vector<OperatingPoint>> curves, double alpha_st,
                        double e_max) {
  if (curves.empty()) throw ValidationError("PSDS needs at least one class curve");
  std::vector<double> support{0.0};
  for (const auto& curve : curves) {
    for (const auto& pt : curve) {
      if (pt.efpr < e_max) support.push_back(pt.efpr);
    }
  }
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());

  const std::size_t n = curves.size();
  std::vector<std::size_t> cursor(n, 0);
  std::vector<double> tpr(n, 0.0);
  double area = 0.0;
  for (std::size_t s = 0; s < support.size(); ++s) {
    const double e = support[s];
    const double next = s + 1 < support.size() ? support[s + 1] : e_max;
    for (std::size_t c = 0; c < n; ++c) {
      const auto& curve = curves[c];
      while (cursor[c] < curve.size() && curve[cursor[c]].efpr <= e) {
        tpr[c] = std::max(tpr[c], curve[cursor[c]].tpr);
        ++cursor[c];
      }
    }
    const double mean = std::accumulate(tpr.begin(), tpr.end(), 0.0) / static_cast<double>(n);
    double etpr = mean;
    if (alpha_st > 0.0) {
      double var = 0.0;
      for (double v : tpr) var += (v - mean) * (v - mean);
      etpr = mean - alpha_st * std::sqrt(var / static_cast<double>(n));
    }
    area += std::max(0.0, etpr) * (next - e);
  }
  return area / e_max;
}

PsdsResult psds(std::span<const ClipScores> scores, const GroundTruth& ground_truth,
                const PsdsParams& params) {
  const PreparedDataset p = prepare(scores, ground_truth, params);
  const bool any_gt = std::any_of(p.gt_per_class.begin(), p.gt_per_class.end(),
                                  [](std::size_t n) { return n > 0; });
  if (!any_gt) throw ValidationError("PSDS needs at least one class with ground truth");

  PsdsResult result;
  result.dataset_duration_hours = p.duration_hours;
  result.curves.resize(p.num_classes);
  const ClassVocabulary& vocab = p.clips.front()->vocabulary();
  parallel_for(p.num_classes, params.threads, [&](std::size_t c) {
    ClassCurve& curve = result.curves[c];
    curve.name = vocab.name(c);
    curve.num_ground_truth = p.gt_per_class[c];
    curve.included =
        curve.num_ground_truth > 0 || params.no_ground_truth == NoGroundTruthPolicy::TprOne;
    curve.points = roc_staircase(sweep_class(p, c, params));
  });

  std::vector<std::vector<OperatingPoint>> included;
  for (const auto& curve : result.curves) {
    if (curve.included) included.push_back(curve.points);
  }
  result.psds = psds_from_curves(included, params.alpha_st, params.e_max);
  return result;
}

}  // namespace sedkit
