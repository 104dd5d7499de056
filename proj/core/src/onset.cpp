#include "sedkit/onset.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "sedkit/error.h"

namespace sedkit {

std::size_t match_onsets(std::vector<double> pred_onsets, std::vector<double> gt_onsets,
                         double tolerance) {
  std::sort(pred_onsets.begin(), pred_onsets.end());
  std::sort(gt_onsets.begin(), gt_onsets.end());
  // A prediction too early for one ground truth is too early for every later
  // one, so a single forward cursor finds the earliest unmatched candidate.
  std::size_t matched = 0;
  std::size_t i = 0;
  for (double g : gt_onsets) {
    while (i < pred_onsets.size() && pred_onsets[i] < g &&
           std::abs(pred_onsets[i] - g) > tolerance) {
      ++i;
    }
    if (i < pred_onsets.size() && std::abs(pred_onsets[i] - g) <= tolerance) {
      ++matched;
      ++i;
    }
  }
  return matched;
}

OnsetResult onset_f(const ClipEvents& pred, const ClipEvents& gt, const OnsetEvalConfig& cfg) {
  if (!(cfg.tolerance > 0.0)) throw ContractError("onset tolerance must be positive");
  std::set<std::string> clips;
  for (const auto& [id, events] : pred) clips.insert(id);
  for (const auto& [id, events] : gt) clips.insert(id);

  OnsetResult r;
  std::size_t n_pred = 0;
  std::size_t n_gt = 0;
  for (const auto& id : clips) {
    std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> by_class;
    if (auto it = pred.find(id); it != pred.end()) {
      for (const auto& e : it->second) by_class[e.class_id].first.push_back(e.onset);
    }
    if (auto it = gt.find(id); it != gt.end()) {
      for (const auto& e : it->second) by_class[e.class_id].second.push_back(e.onset);
    }
    for (auto& [cls, lists] : by_class) {
      n_pred += lists.first.size();
      n_gt += lists.second.size();
      r.tp += match_onsets(std::move(lists.first), std::move(lists.second), cfg.tolerance);
    }
  }
  r.fp = n_pred - r.tp;
  r.fn = n_gt - r.tp;
  r.precision = n_pred > 0 ? static_cast<double>(r.tp) / static_cast<double>(n_pred) : 0.0;
  r.recall = n_gt > 0 ? static_cast<double>(r.tp) / static_cast<double>(n_gt) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

}  // namespace sedkit
