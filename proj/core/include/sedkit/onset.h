#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "sedkit/timeline.h"

namespace sedkit {

struct OnsetEvalConfig {
  double tolerance = 0.05;  // seconds
};

struct OnsetResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

// clip id -> events of that clip (all classes).
using ClipEvents = std::map<std::string, std::vector<Event>>;

// Number of ground truths matched within one clip and class. Both lists are
// sorted by onset; each ground truth (in onset order) takes the earliest
// unmatched prediction with |onset_pred - onset_gt| <= tolerance.
std::size_t match_onsets(std::vector<double> pred_onsets, std::vector<double> gt_onsets,
                         double tolerance);

// Micro-averaged onset precision / recall / F1 over all clips and classes.
// Undefined ratios are reported as 0.
OnsetResult onset_f(const ClipEvents& pred, const ClipEvents& gt, const OnsetEvalConfig& cfg = {});

}  // namespace sedkit
