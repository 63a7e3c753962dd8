#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "maskbench/dataset/types.hpp"

namespace maskbench::metrics {

// Strictly increasing thresholds in [0,1]. Factory grids are built from
// integer ratios (e.g. 60/100.0), never by accumulating a float step, so a
// detection whose IoU is exactly on a grid point compares the same way on
// every platform.
struct ThresholdGrid {
    std::vector<double> thresholds;

    static ThresholdGrid coco();              // 0.50, 0.55, ..., 0.95
    static ThresholdGrid uniform(int divisions); // j/divisions for j = 0..divisions

    void validate() const;
};

struct MapResult {
    double map = 0.0;
    std::vector<std::pair<double, double>> ap_per_threshold; // (threshold, AP)
};

// Single-category COCO-protocol mAP: detections ranked globally by descending
// score (ties by image id, then in-image index), greedy per-image assignment
// at box IoU >= t, 101-point interpolated AP averaged over the grid.
MapResult coco_map(const std::map<std::int64_t, std::vector<dataset::Detection>>& detections,
                   const std::map<std::int64_t, std::vector<dataset::GtInstance>>& gts,
                   const ThresholdGrid& grid);

} // namespace maskbench::metrics
