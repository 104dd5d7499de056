#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sedkit/timeline.h"

namespace sedkit {

// round(window_seconds / resolution), bumped to the next odd count.
// 0.48 s at 40 ms gives 13 frames.
std::size_t median_window_frames(double window_seconds, double resolution);

// Running median with an odd window. Near the edges the window shrinks
// symmetrically; a window longer than the signal yields the whole-signal
// (lower) median everywhere.
std::vector<double> median_filter_column(std::span<const double> x, std::size_t window);

// Per-class running median over frames, shared window for all classes.
ScoreMatrix median_filter(const ScoreMatrix& scores, double window_seconds);

}  // namespace sedkit
