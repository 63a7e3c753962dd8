#include "maskbench/metrics/metrics.hpp"

#include <algorithm>

#include "maskbench/raster/ops.hpp"

namespace maskbench::metrics {

double mask_iou(const raster::BinaryMask& pred, const raster::BinaryMask& gt) {
    raster::ConfusionCounts c = raster::pixel_counts(pred, gt);
    if (c.union_area == 0) {
        throw UndefinedMetricError("IoU undefined: both masks are empty");
    }
    return static_cast<double>(c.intersection) / static_cast<double>(c.union_area);
}

double dice(const raster::BinaryMask& pred, const raster::BinaryMask& gt) {
    raster::ConfusionCounts c = raster::pixel_counts(pred, gt);
    if (c.pred_area + c.gt_area == 0) {
        throw UndefinedMetricError("Dice undefined: both masks are empty");
    }
    return 2.0 * static_cast<double>(c.intersection) /
           static_cast<double>(c.pred_area + c.gt_area);
}

std::pair<double, double> pixel_precision_recall(const raster::BinaryMask& pred,
                                                 const raster::BinaryMask& gt) {
    raster::ConfusionCounts c = raster::pixel_counts(pred, gt);
    if (c.pred_area == 0) {
        throw UndefinedMetricError("precision undefined: prediction mask is empty");
    }
    if (c.gt_area == 0) {
        throw UndefinedMetricError("recall undefined: ground-truth mask is empty");
    }
    return {static_cast<double>(c.intersection) / static_cast<double>(c.pred_area),
            static_cast<double>(c.intersection) / static_cast<double>(c.gt_area)};
}

double relaxed_iou(const raster::BinaryMask& pred, const raster::BinaryMask& gt, int radius) {
    if (radius == 0) return mask_iou(pred, gt);
    return mask_iou(raster::dilate(pred, radius), raster::dilate(gt, radius));
}

double box_iou(const raster::BBox& a, const raster::BBox& b) {
    raster::validate_bbox(a);
    raster::validate_bbox(b);
    double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    double inter = ix * iy;
    return inter / (a.w * a.h + b.w * b.h - inter);
}

} // namespace maskbench::metrics
