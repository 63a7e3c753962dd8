#include "maskbench/metrics/curves.hpp"

#include <string>

#include "maskbench/metrics/metrics.hpp"

namespace maskbench::metrics {

double fraction_at(const std::vector<double>& ious, double t) {
    if (ious.empty()) {
        throw UndefinedMetricError("threshold curve undefined: no instances");
    }
    std::size_t hits = 0;
    for (double iou : ious) {
        if (iou >= t) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ious.size());
}

std::vector<std::pair<double, double>> threshold_curve(const std::vector<double>& ious,
                                                       const ThresholdGrid& grid) {
    grid.validate();
    std::vector<std::pair<double, double>> curve;
    curve.reserve(grid.thresholds.size());
    for (double t : grid.thresholds) {
        curve.emplace_back(t, fraction_at(ious, t));
    }
    return curve;
}

std::vector<std::pair<int, double>> relaxed_sweep(
    const std::vector<std::pair<raster::BinaryMask, raster::BinaryMask>>& pairs,
    const std::vector<int>& radii) {
    if (pairs.empty()) {
        throw UndefinedMetricError("relaxed sweep undefined: no matched mask pairs");
    }
    if (radii.empty() || radii.front() != 0) {
        throw ConfigError("sweep radii must start at 0");
    }
    for (std::size_t i = 1; i < radii.size(); ++i) {
        if (radii[i] <= radii[i - 1]) {
            throw ConfigError("sweep radii must be strictly increasing");
        }
    }
    std::vector<std::pair<int, double>> sweep;
    sweep.reserve(radii.size());
    for (int radius : radii) {
        double sum = 0.0;
        for (const auto& [pred, gt] : pairs) {
            sum += relaxed_iou(pred, gt, radius);
        }
        sweep.emplace_back(radius, sum / static_cast<double>(pairs.size()));
    }
    return sweep;
}

} // namespace maskbench::metrics
