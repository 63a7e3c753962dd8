#pragma once

#include <utility>
#include <vector>

#include "maskbench/metrics/map.hpp"
#include "maskbench/raster/types.hpp"

namespace maskbench::metrics {

// Fraction of IoUs at or above t. The instance list must include unmatched
// ground truth as zeros for detector-penalizing operating points.
double fraction_at(const std::vector<double>& ious, double t);

// (t, fraction ≥ t) for every grid point.
std::vector<std::pair<double, double>> threshold_curve(const std::vector<double>& ious,
                                                       const ThresholdGrid& grid);

// Mean relaxed IoU over matched mask pairs at each radius. Radii must be
// sorted ascending and start at 0 so the first entry is the plain mean IoU.
std::vector<std::pair<int, double>> relaxed_sweep(
    const std::vector<std::pair<raster::BinaryMask, raster::BinaryMask>>& pairs,
    const std::vector<int>& radii);

} // namespace maskbench::metrics
