#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "maskbench/dataset/types.hpp"

namespace maskbench::metrics {

struct MatchPair {
    std::int64_t gt_instance_id = 0;
    std::size_t detection_index = 0;
    double box_iou = 0.0;
};

// Result of greedy per-image matching. Every GT id and detection index
// appears exactly once across pairs and the unmatched lists.
struct MatchSet {
    std::vector<MatchPair> pairs;
    std::vector<std::int64_t> unmatched_gt;
    std::vector<std::size_t> unmatched_detections;
    double iou_threshold = 0.0;
};

// Greedy matching: detections in descending score order (equal scores keep
// input order) each claim the unmatched GT with the highest box IoU at or
// above the threshold; IoU ties go to the lower GT instance id.
MatchSet match_instances(const std::vector<dataset::Detection>& detections,
                         const std::vector<dataset::GtInstance>& gts,
                         double iou_threshold);

// Matched GT / total GT across the given match sets.
double detection_rate(const std::vector<MatchSet>& matchsets);

} // namespace maskbench::metrics
