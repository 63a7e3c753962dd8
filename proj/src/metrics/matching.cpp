#include "maskbench/metrics/matching.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "maskbench/metrics/metrics.hpp"

namespace maskbench::metrics {

MatchSet match_instances(const std::vector<dataset::Detection>& detections,
                         const std::vector<dataset::GtInstance>& gts,
                         double iou_threshold) {
    if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
        throw ConfigError("match threshold must lie in [0, 1], got " + std::to_string(iou_threshold));
    }
    for (const auto& det : detections) {
        for (const auto& gt : gts) {
            if (det.image_id != gt.image_id) {
                throw ReferentialIntegrityError(
                    "match_instances mixes images " + std::to_string(det.image_id) + " and " +
                    std::to_string(gt.image_id));
            }
        }
    }

    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return detections[a].score > detections[b].score;
    });

    MatchSet result;
    result.iou_threshold = iou_threshold;
    std::vector<bool> gt_taken(gts.size(), false);
    std::vector<bool> det_matched(detections.size(), false);
    for (std::size_t det_index : order) {
        std::size_t best = gts.size();
        double best_iou = -1.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gt_taken[g]) continue;
            double iou = box_iou(detections[det_index].bbox, gts[g].bbox);
            if (iou < iou_threshold) continue;
            bool better = iou > best_iou ||
                          (iou == best_iou && best < gts.size() &&
                           gts[g].instance_id < gts[best].instance_id);
            if (better) {
                best = g;
                best_iou = iou;
            }
        }
        if (best < gts.size()) {
            gt_taken[best] = true;
            det_matched[det_index] = true;
            result.pairs.push_back({gts[best].instance_id, det_index, best_iou});
        }
    }
    for (std::size_t g = 0; g < gts.size(); ++g) {
        if (!gt_taken[g]) result.unmatched_gt.push_back(gts[g].instance_id);
    }
    std::sort(result.unmatched_gt.begin(), result.unmatched_gt.end());
    for (std::size_t d = 0; d < detections.size(); ++d) {
        if (!det_matched[d]) result.unmatched_detections.push_back(d);
    }
    return result;
}

double detection_rate(const std::vector<MatchSet>& matchsets) {
    std::size_t matched = 0;
    std::size_t total = 0;
    for (const auto& ms : matchsets) {
        matched += ms.pairs.size();
        total += ms.pairs.size() + ms.unmatched_gt.size();
    }
    if (total == 0) {
        throw UndefinedMetricError("detection rate undefined: stratum has no ground-truth instances");
    }
    return static_cast<double>(matched) / static_cast<double>(total);
}

} // namespace maskbench::metrics
