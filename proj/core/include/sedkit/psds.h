#pragma once

// Threshold-independent Polyphonic Sound Detection Score with
// intersection-based matching.
//
// Every distinct positive score of a class is a change point; detections are
// constant between consecutive change points, so evaluating all of them gives
// the exact per-class ROC. The sweep visits change points in decreasing order
// and updates detections incrementally as frames switch on, instead of
// re-decoding the dataset per threshold.
//
// Event and frame boundaries are compared on an integer microsecond grid so
// overlap sums are exact and independent of evaluation order.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sedkit/timeline.h"

namespace sedkit {

inline constexpr double kTicksPerSecond = 1e6;
inline std::int64_t to_ticks(double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds * kTicksPerSecond));
}

enum class NoGroundTruthPolicy {
  TprOne,   // classes without ground truth count as TPR = 1 everywhere
  Exclude,  // ... or are left out of the across-class mean
};

struct PsdsParams {
  double rho_dtc = 0.7;
  double rho_gtc = 0.7;
  double alpha_st = 0.0;  // variance penalty weight
  double e_max = 100.0;   // false positives per hour
  NoGroundTruthPolicy no_ground_truth = NoGroundTruthPolicy::TprOne;
  std::optional<double> median_filter_seconds;
  std::size_t threads = 1;  // 0 = hardware concurrency

  void validate() const;
};

struct ClipScores {
  std::string clip_id;
  ScoreMatrix scores;
};

// clip id -> ground-truth events; class ids index the scores' vocabulary.
using GroundTruth = std::map<std::string, std::vector<Event>>;

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

// Detection d is valid when sum_g |d ∩ g| / |d| >= rho_dtc; invalid detections
// are false positives. Ground truth g is a true positive when
// sum over valid d of |g ∩ d| / |g| >= rho_gtc. Both lists hold one class of
// one clip.
MatchCounts intersection_match(std::span<const Event> detections,
                               std::span<const Event> ground_truths, double rho_dtc,
                               double rho_gtc);

// Sorted distinct positive scores of class `class_id` over all clips.
std::vector<double> change_point_thresholds(std::span<const ClipScores> scores,
                                            std::size_t class_id);

// Raw counts at one threshold. The empty-detection point uses +inf.
struct OperatingPoint {
  double threshold = std::numeric_limits<double>::infinity();
  std::size_t tp = 0;
  std::size_t fp = 0;
  double tpr = 0.0;
  double efpr = 0.0;  // false positives per hour
  friend bool operator==(const OperatingPoint&, const OperatingPoint&) = default;
};

// Every operating point of one class: the empty-detection point followed by
// one point per change point in decreasing threshold order.
std::vector<OperatingPoint> operating_points(std::span<const ClipScores> scores,
                                             const GroundTruth& ground_truth,
                                             std::size_t class_id, const PsdsParams& params);

// Non-dominated upper staircase of points: sorted by eFPR, TPR strictly increasing.
std::vector<OperatingPoint> roc_staircase(std::vector<OperatingPoint> points);

// operating_points reduced to its staircase.
std::vector<OperatingPoint> per_class_roc(std::span<const ClipScores> scores,
                                          const GroundTruth& ground_truth, std::size_t class_id,
                                          const PsdsParams& params);

struct ClassCurve {
  std::string name;
  std::size_t num_ground_truth = 0;
  bool included = true;
  std::vector<OperatingPoint> points;  // staircase
};

struct PsdsResult {
  double psds = 0.0;
  double dataset_duration_hours = 0.0;
  std::vector<ClassCurve> curves;
};

// Normalised area under eTPR(e) = max(0, mean_c TPR_c(e) - alpha_st * std_c TPR_c(e))
// over [0, e_max], where TPR_c(e) is the best TPR of class c with eFPR <= e.
// Per-class curves are computed in parallel; the result does not depend on
// params.threads.
PsdsResult psds(std::span<const ClipScores> scores, const GroundTruth& ground_truth,
                const PsdsParams& params);

// Integration step on its own: curves must be staircases sorted by eFPR.
double psds_from_curves(std::span<const std::vector<OperatingPoint>> curves, double alpha_st,
                        double e_max);

}  // namespace sedkit
