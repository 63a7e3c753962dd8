#pragma once

#include <utility>

#include "maskbench/raster/types.hpp"

namespace maskbench::metrics {

// Intersection over union of two equally sized masks. Both-empty input is an
// UndefinedMetricError: callers decide whether a degenerate pair means 0, 1,
// or a bug, and silence here has corrupted benchmark tables before.
double mask_iou(const raster::BinaryMask& pred, const raster::BinaryMask& gt);

// 2·|pred ∩ gt| / (|pred| + |gt|); equals 2·iou/(1+iou) exactly.
double dice(const raster::BinaryMask& pred, const raster::BinaryMask& gt);

// (intersection/pred_area, intersection/gt_area). Each empty denominator
// raises UndefinedMetricError.
std::pair<double, double> pixel_precision_recall(const raster::BinaryMask& pred,
                                                 const raster::BinaryMask& gt);

// IoU after dilating both masks with a square structuring element of the
// given radius; radius 0 is plain IoU.
double relaxed_iou(const raster::BinaryMask& pred, const raster::BinaryMask& gt, int radius);

// Continuous-coordinate box IoU; 0 for disjoint or merely touching boxes.
double box_iou(const raster::BBox& a, const raster::BBox& b);

} // namespace maskbench::metrics
