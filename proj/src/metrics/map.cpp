#include "maskbench/metrics/map.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "maskbench/metrics/metrics.hpp"

namespace maskbench::metrics {

ThresholdGrid ThresholdGrid::coco() {
    ThresholdGrid grid;
    grid.thresholds.reserve(10);
    for (int i = 0; i < 10; ++i) {
        grid.thresholds.push_back((50 + 5 * i) / 100.0);
    }
    return grid;
}

ThresholdGrid ThresholdGrid::uniform(int divisions) {
    if (divisions < 1) {
        throw ConfigError("threshold grid needs at least 1 division, got " + std::to_string(divisions));
    }
    ThresholdGrid grid;
    grid.thresholds.reserve(static_cast<std::size_t>(divisions) + 1);
    for (int j = 0; j <= divisions; ++j) {
        grid.thresholds.push_back(static_cast<double>(j) / static_cast<double>(divisions));
    }
    return grid;
}

void ThresholdGrid::validate() const {
    if (thresholds.empty()) throw ConfigError("threshold grid is empty");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] >= 0.0 && thresholds[i] <= 1.0)) {
            throw ConfigError("threshold " + std::to_string(thresholds[i]) + " outside [0, 1]");
        }
        if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
            throw ConfigError("threshold grid must be strictly increasing");
        }
    }
}

namespace {

struct RankedDetection {
    std::int64_t image_id;
    std::size_t index; // position within its image's detection list
    double score;
};

// One threshold's AP: greedy TP/FP assignment down the global ranking, then
// the 101-point interpolated precision average.
double average_precision(const std::vector<RankedDetection>& ranking,
                         const std::map<std::int64_t, std::vector<dataset::Detection>>& detections,
                         const std::map<std::int64_t, std::vector<dataset::GtInstance>>& gts,
                         std::size_t total_gt, double threshold) {
    std::map<std::int64_t, std::vector<bool>> gt_taken;
    for (const auto& [image_id, list] : gts) {
        gt_taken[image_id].assign(list.size(), false);
    }

    std::vector<bool> is_tp(ranking.size(), false);
    for (std::size_t k = 0; k < ranking.size(); ++k) {
        const RankedDetection& rd = ranking[k];
        auto git = gts.find(rd.image_id);
        if (git == gts.end()) continue; // image with no GT: every detection is a FP
        const auto& image_gts = git->second;
        auto& taken = gt_taken[rd.image_id];
        const dataset::Detection& det = detections.at(rd.image_id)[rd.index];
        std::size_t best = image_gts.size();
        double best_iou = -1.0;
        for (std::size_t g = 0; g < image_gts.size(); ++g) {
            if (taken[g]) continue;
            double iou = box_iou(det.bbox, image_gts[g].bbox);
            if (iou < threshold) continue;
            bool better = iou > best_iou ||
                          (iou == best_iou && best < image_gts.size() &&
                           image_gts[g].instance_id < image_gts[best].instance_id);
            if (better) {
                best = g;
                best_iou = iou;
            }
        }
        if (best < image_gts.size()) {
            taken[best] = true;
            is_tp[k] = true;
        }
    }

    std::vector<double> precision(ranking.size());
    std::vector<double> recall(ranking.size());
    std::size_t tp = 0;
    for (std::size_t k = 0; k < ranking.size(); ++k) {
        if (is_tp[k]) ++tp;
        precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
        recall[k] = static_cast<double>(tp) / static_cast<double>(total_gt);
    }
    for (std::size_t k = precision.size(); k-- > 1;) {
        precision[k - 1] = std::max(precision[k - 1], precision[k]);
    }

    double ap_sum = 0.0;
    std::size_t cursor = 0;
    for (int j = 0; j <= 100; ++j) {
        double r = static_cast<double>(j) / 100.0;
        while (cursor < recall.size() && recall[cursor] < r) ++cursor;
        if (cursor < recall.size()) ap_sum += precision[cursor];
    }
    return ap_sum / 101.0;
}

} // namespace

MapResult coco_map(const std::map<std::int64_t, std::vector<dataset::Detection>>& detections,
                   const std::map<std::int64_t, std::vector<dataset::GtInstance>>& gts,
                   const ThresholdGrid& grid) {
    grid.validate();
    std::size_t total_gt = 0;
    for (const auto& [image_id, list] : gts) total_gt += list.size();
    if (total_gt == 0) {
        throw UndefinedMetricError("mAP undefined: no ground-truth instances");
    }

    std::vector<RankedDetection> ranking;
    for (const auto& [image_id, list] : detections) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            ranking.push_back({image_id, i, list[i].score});
        }
    }
    // std::map iteration already yields (image_id, index) ascending, so a
    // stable sort on score alone implements the documented tie order.
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const RankedDetection& a, const RankedDetection& b) { return a.score > b.score; });

    MapResult result;
    result.ap_per_threshold.reserve(grid.thresholds.size());
    double sum = 0.0;
    for (double t : grid.thresholds) {
        double ap = ranking.empty() ? 0.0 : average_precision(ranking, detections, gts, total_gt, t);
        result.ap_per_threshold.emplace_back(t, ap);
        sum += ap;
    }
    result.map = sum / static_cast<double>(grid.thresholds.size());
    return result;
}

} // namespace maskbench::metrics
