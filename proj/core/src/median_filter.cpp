#include "sedkit/median_filter.h"

#include <algorithm>
#include <cmath>

#include "sedkit/error.h"

namespace sedkit {

std::size_t median_window_frames(double window_seconds, double resolution) {
  if (!(window_seconds > 0.0) || !std::isfinite(window_seconds)) {
    throw ContractError("median filter window must be positive");
  }
  auto frames = static_cast<std::size_t>(std::llround(window_seconds / resolution));
  if (frames % 2 == 0) ++frames;
  return frames;
}

std::vector<double> median_filter_column(std::span<const double> x, std::size_t window) {
  if (window == 0 || window % 2 == 0) throw ContractError("median window must be odd");
  const std::size_t n = x.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  std::vector<double> buf;
  if (window > n) {
    buf.assign(x.begin(), x.end());
    const auto mid = buf.begin() + static_cast<std::ptrdiff_t>((n - 1) / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    std::fill(out.begin(), out.end(), *mid);
    return out;
  }
  const std::size_t half = window / 2;
  buf.reserve(window);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t h = std::min({half, t, n - 1 - t});
    buf.assign(x.begin() + static_cast<std::ptrdiff_t>(t - h),
               x.begin() + static_cast<std::ptrdiff_t>(t + h + 1));
    const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(h);
    std::nth_element(buf.begin(), mid, buf.end());
    out[t] = *mid;
  }
  return out;
}

ScoreMatrix median_filter(const ScoreMatrix& scores, double window_seconds) {
  const std::size_t window = median_window_frames(window_seconds, scores.grid().resolution());
  Matrix out(scores.num_frames(), scores.num_classes());
  for (std::size_t c = 0; c < scores.num_classes(); ++c) {
    const auto column = scores.scores().column(c);
    out.set_column(c, median_filter_column(column, window));
  }
  return scores.with_scores(std::move(out));
}

}  // namespace sedkit
