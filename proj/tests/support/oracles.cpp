#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include <boost/math/distributions/normal.hpp>

namespace oracle {

namespace {

std::int64_t micros(double s) { return std::llround(s * 1e6); }

std::int64_t overlap(std::int64_t a0, std::int64_t a1, std::int64_t b0, std::int64_t b1) {
  return std::max<std::int64_t>(0, std::min(a1, b1) - std::max(a0, b0));
}

double quantile(const std::vector<double>& sorted, double t) {
  const auto n = sorted.size();
  auto k = static_cast<std::size_t>(std::ceil(t * static_cast<double>(n))) ;
  if (k == 0) k = 1;
  return sorted[std::min(k, n) - 1];
}

}  // namespace

std::vector<RocPoint> dense_sweep(const std::vector<Clip>& clips, const std::vector<GtEvent>& gt,
                                  std::size_t cls, const PsdsSetup& setup) {
  double seconds = 0.0;
  for (const auto& c : clips) seconds += static_cast<double>(c.frames) * setup.resolution;
  const double hours = seconds / 3600.0;

  std::set<double> values;
  for (const auto& c : clips) {
    for (const auto& row : c.scores) {
      if (row[cls] > 0.0) values.insert(row[cls]);
    }
  }
  std::vector<double> candidates(values.begin(), values.end());
  std::vector<double> v(values.begin(), values.end());
  for (std::size_t i = 0; i + 1 < v.size(); ++i) candidates.push_back(0.5 * (v[i] + v[i + 1]));
  candidates.push_back(v.empty() ? 1.0 : v.back() + 1.0);
  std::sort(candidates.begin(), candidates.end());

  std::size_t num_gt = 0;
  for (const auto& g : gt) num_gt += g.cls == cls ? 1 : 0;
  const std::int64_t frame_us = micros(setup.resolution);

  std::vector<RocPoint> points;
  for (double th : candidates) {
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (const auto& c : clips) {
      std::vector<std::pair<std::int64_t, std::int64_t>> dets;
      for (std::size_t t = 0; t < c.frames;) {
        if (c.scores[t][cls] >= th) {
          std::size_t e = t;
          while (e < c.frames && c.scores[e][cls] >= th) ++e;
          dets.emplace_back(static_cast<std::int64_t>(t) * frame_us, static_cast<std::int64_t>(e) * frame_us);
          t = e;
        } else {
          ++t;
        }
      }
      std::vector<std::pair<std::int64_t, std::int64_t>> gts;
      for (const auto& g : gt) {
        if (g.clip == c.id && g.cls == cls) gts.emplace_back(micros(g.onset), micros(g.offset));
      }
      std::vector<bool> valid(dets.size(), false);
      for (std::size_t d = 0; d < dets.size(); ++d) {
        std::int64_t hit = 0;
        for (const auto& g : gts) hit += overlap(dets[d].first, dets[d].second, g.first, g.second);
        const double ratio = static_cast<double>(hit) / static_cast<double>(dets[d].second - dets[d].first);
        valid[d] = ratio >= setup.rho_dtc;
        if (!valid[d]) ++fp;
      }
      for (const auto& g : gts) {
        std::int64_t covered = 0;
        for (std::size_t d = 0; d < dets.size(); ++d) {
          if (valid[d]) covered += overlap(dets[d].first, dets[d].second, g.first, g.second);
        }
        if (static_cast<double>(covered) / static_cast<double>(g.second - g.first) >= setup.rho_gtc) ++tp;
      }
    }
    const double tpr = num_gt ? static_cast<double>(tp) / static_cast<double>(num_gt) : 1.0;
    points.push_back({th, tp, fp, tpr, static_cast<double>(fp) / hours});
  }
  return points;
}

double dense_psds(const std::vector<Clip>& clips, const std::vector<GtEvent>& gt,
                  const PsdsSetup& setup) {
  std::vector<std::vector<RocPoint>> curves;
  for (std::size_t c = 0; c < setup.classes; ++c) {
    const bool has_gt = std::any_of(gt.begin(), gt.end(), [&](const GtEvent& g) { return g.cls == c; });
    if (!has_gt && !setup.no_gt_tpr_one) continue;
    curves.push_back(dense_sweep(clips, gt, c, setup));
  }
  std::set<double> grid{0.0};
  for (const auto& curve : curves) {
    for (const auto& p : curve) {
      if (p.efpr < setup.e_max) grid.insert(p.efpr);
    }
  }
  std::vector<double> e(grid.begin(), grid.end());
  e.push_back(setup.e_max);
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    std::vector<double> best;
    for (const auto& curve : curves) {
      double b = 0.0;
      for (const auto& p : curve) {
        if (p.efpr <= e[i]) b = std::max(b, p.tpr);
      }
      best.push_back(b);
    }
    double mean = 0.0;
    for (double b : best) mean += b;
    mean /= static_cast<double>(best.size());
    double var = 0.0;
    for (double b : best) var += (b - mean) * (b - mean);
    var /= static_cast<double>(best.size());
    area += std::max(0.0, mean - setup.alpha_st * std::sqrt(var)) * (e[i + 1] - e[i]);
  }
  return area / setup.e_max;
}

std::vector<std::pair<std::int64_t, std::int64_t>> frame_union(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& intervals, std::int64_t frame_units,
    std::int64_t num_frames) {
  std::vector<bool> active(static_cast<std::size_t>(num_frames), false);
  for (std::int64_t t = 0; t < num_frames; ++t) {
    for (const auto& [a, b] : intervals) {
      if (overlap(a, b, t * frame_units, (t + 1) * frame_units) > 0) active[static_cast<std::size_t>(t)] = true;
    }
  }
  std::vector<std::pair<std::int64_t, std::int64_t>> runs;
  for (std::int64_t t = 0; t < num_frames; ++t) {
    if (!active[static_cast<std::size_t>(t)]) continue;
    if (!runs.empty() && runs.back().second == t) {
      runs.back().second = t + 1;
    } else {
      runs.emplace_back(t, t + 1);
    }
  }
  return runs;
}

double kd_loss(const std::vector<double>& z, const std::vector<double>& hard,
               const std::vector<double>& soft, double lambda) {
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-z[i]));
    const double bce_h = -(hard[i] * std::log(p) + (1.0 - hard[i]) * std::log(1.0 - p));
    const double bce_s = -(soft[i] * std::log(p) + (1.0 - soft[i]) * std::log(1.0 - p));
    total += (1.0 - lambda) * bce_h + lambda * bce_s;
  }
  return total / static_cast<double>(z.size());
}

double violation_ratio(const std::vector<double>& a, const std::vector<double>& b, std::size_t grid) {
  std::vector<double> sa = a;
  std::vector<double> sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(grid);
    const double d = quantile(sb, t) - quantile(sa, t);
    if (d > 0) num += d * d;
    den += d * d;
  }
  return den == 0.0 ? 0.5 : num / den;
}

double epsilon_min(const std::vector<double>& a, const std::vector<double>& b, double alpha,
                   std::size_t comparisons, std::size_t iterations, std::uint64_t seed) {
  std::mt19937 gen(static_cast<std::uint32_t>(seed * 2654435761u + 17u));
  std::vector<double> stats;
  std::vector<double> ra(a.size());
  std::vector<double> rb(b.size());
  for (std::size_t it = 0; it < iterations; ++it) {
    std::uniform_int_distribution<std::size_t> pa(0, a.size() - 1);
    std::uniform_int_distribution<std::size_t> pb(0, b.size() - 1);
    for (auto& x : ra) x = a[pa(gen)];
    for (auto& x : rb) x = b[pb(gen)];
    stats.push_back(violation_ratio(ra, rb, 2000));
  }
  double mean = 0.0;
  for (double s : stats) mean += s;
  mean /= static_cast<double>(stats.size());
  double var = 0.0;
  for (double s : stats) var += (s - mean) * (s - mean);
  const double sd = std::sqrt(var / static_cast<double>(stats.size()));
  const boost::math::normal_distribution<double> normal;
  const double z = boost::math::quantile(normal, 1.0 - alpha / static_cast<double>(comparisons));
  return std::clamp(violation_ratio(a, b) + z * sd, 0.0, 1.0);
}

}  // namespace oracle
