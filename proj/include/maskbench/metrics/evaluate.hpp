#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "maskbench/dataset/types.hpp"
#include "maskbench/metrics/map.hpp"
#include "maskbench/metrics/matching.hpp"

namespace maskbench::metrics {

struct EvalConfig {
    double match_threshold = 0.5;
    std::vector<int> relaxed_radii = {0, 1, 2, 3};
    // Headline IoU mean/std/median run over matched instances by default;
    // setting this folds unmatched GT in as zeros.
    bool include_unmatched = false;
    ThresholdGrid map_grid = ThresholdGrid::coco();
};

// Everything the report layer needs about one ground-truth instance.
// Unmatched instances carry zeros for every mask metric.
struct InstanceResult {
    std::int64_t instance_id = 0;
    std::int64_t image_id = 0;
    dataset::SceneTag scene = dataset::SceneTag::Unknown;
    bool matched = false;
    bool segmentation_failed = false;
    bool box_mask = false;
    double box_iou = 0.0;
    double mask_iou = 0.0;
    double dice = 0.0;
    double pixel_precision = 0.0;
    double pixel_recall = 0.0;
    std::vector<std::pair<int, double>> relaxed; // (radius, relaxed IoU)
};

struct EvalResult {
    std::vector<InstanceResult> instances; // ascending image_id, then instance_id
    std::vector<MatchSet> matchsets;       // one per image, ascending image_id
    MapResult map;
    std::size_t detection_count = 0;
    EvalConfig config;
};

// Full offline evaluation of stored predictions against ground truth:
// per-image greedy matching, per-pair mask metrics, and dataset-level mAP.
// Per-instance metrics with an empty denominator (e.g. precision of an empty
// predicted mask) are recorded as 0 rather than raised, so one degenerate
// instance cannot abort a benchmark run.
EvalResult evaluate(const dataset::GroundTruth& gt, const dataset::PredictionSet& preds,
                    const EvalConfig& cfg);

} // namespace maskbench::metrics
