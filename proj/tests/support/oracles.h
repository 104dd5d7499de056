#pragma once

// Slow, direct reimplementations used as references by the tests. None of
// them call into the code they check.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

// ---- PSDS -------------------------------------------------------------

struct Clip {
  std::string id;
  std::size_t frames = 0;
  std::vector<std::vector<double>> scores;  // [frame][class], probabilities
};

struct GtEvent {
  std::string clip;
  std::size_t cls = 0;
  double onset = 0.0;
  double offset = 0.0;
};

struct PsdsSetup {
  double resolution = 0.04;
  std::size_t classes = 0;
  double rho_dtc = 0.7;
  double rho_gtc = 0.7;
  double alpha_st = 0.0;
  double e_max = 100.0;
  bool no_gt_tpr_one = true;  // else classes without ground truth are dropped
};

struct RocPoint {
  double threshold;
  std::size_t tp;
  std::size_t fp;
  double tpr;
  double efpr;
};

// Every candidate threshold of class c: each distinct positive score, each
// midpoint between consecutive ones, and one value above the maximum. At
// each, detections are re-decoded from scratch and matched against all
// ground truths.
std::vector<RocPoint> dense_sweep(const std::vector<Clip>& clips, const std::vector<GtEvent>& gt,
                                  std::size_t cls, const PsdsSetup& setup);

// Area under max(0, mean - alpha * std) of the per-class best TPR at or
// below each eFPR, sampled on the union of all eFPR values.
double dense_psds(const std::vector<Clip>& clips, const std::vector<GtEvent>& gt,
                  const PsdsSetup& setup);

// ---- frames -----------------------------------------------------------

// Frames of length `frame_units` touched (positive overlap) by any of the
// integer-unit intervals, by checking every frame against every interval.
// Returns maximal active runs as [first_frame, end_frame).
std::vector<std::pair<std::int64_t, std::int64_t>> frame_union(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& intervals, std::int64_t frame_units,
    std::int64_t num_frames);

// ---- KD loss ----------------------------------------------------------

// (1 - lambda) * BCE(sigmoid(z), h) + lambda * BCE(sigmoid(z), s), averaged,
// written with explicit logs of the sigmoid.
double kd_loss(const std::vector<double>& z, const std::vector<double>& hard,
               const std::vector<double>& soft, double lambda);

// ---- ASO --------------------------------------------------------------

// Violation ratio by midpoint quadrature on `grid` points of the empirical
// quantile functions.
double violation_ratio(const std::vector<double>& a, const std::vector<double>& b,
                       std::size_t grid = 20000);

// Bootstrap standard deviation of the quadrature violation ratio with a
// private generator, turned into the same one-sided normal bound.
double epsilon_min(const std::vector<double>& a, const std::vector<double>& b, double alpha,
                   std::size_t comparisons, std::size_t iterations, std::uint64_t seed);

}  // namespace oracle
