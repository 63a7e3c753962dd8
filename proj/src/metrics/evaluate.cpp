#include "maskbench/metrics/evaluate.hpp"

#include <algorithm>
#include <map>

#include "maskbench/raster/ops.hpp"

namespace maskbench::metrics {

namespace {

const std::vector<dataset::PredictedInstance> kNoPredictions;

const std::vector<dataset::PredictedInstance>& predictions_for(
    const dataset::PredictionSet& preds, std::int64_t image_id) {
    auto it = preds.by_image.find(image_id);
    return it == preds.by_image.end() ? kNoPredictions : it->second;
}

InstanceResult scored_pair(const dataset::GtInstance& gt_inst,
                           const dataset::PredictedInstance& pred, const dataset::GtImage& image,
                           double pair_box_iou, const std::vector<int>& radii) {
    InstanceResult res;
    res.instance_id = gt_inst.instance_id;
    res.image_id = gt_inst.image_id;
    res.scene = gt_inst.scene;
    res.matched = true;
    res.segmentation_failed = pred.segmentation_failed;
    res.box_mask = pred.box_mask;
    res.box_iou = pair_box_iou;

    raster::BinaryMask gt_mask(image.width, image.height);
    for (const auto& poly : gt_inst.polygons) {
        raster::BinaryMask one = raster::rasterize_polygon(poly, image.width, image.height);
        for (std::size_t i = 0; i < one.data().size(); ++i) {
            if (one.data()[i]) gt_mask.data()[i] = 1;
        }
    }
    raster::BinaryMask pred_mask = raster::rle_decode(pred.mask);
    raster::ConfusionCounts c = raster::pixel_counts(pred_mask, gt_mask);
    res.mask_iou =
        c.union_area ? static_cast<double>(c.intersection) / static_cast<double>(c.union_area) : 0.0;
    res.dice = (c.pred_area + c.gt_area)
                   ? 2.0 * static_cast<double>(c.intersection) /
                         static_cast<double>(c.pred_area + c.gt_area)
                   : 0.0;
    res.pixel_precision =
        c.pred_area ? static_cast<double>(c.intersection) / static_cast<double>(c.pred_area) : 0.0;
    res.pixel_recall =
        c.gt_area ? static_cast<double>(c.intersection) / static_cast<double>(c.gt_area) : 0.0;

    res.relaxed.reserve(radii.size());
    for (int radius : radii) {
        if (radius == 0) {
            res.relaxed.emplace_back(0, res.mask_iou);
            continue;
        }
        raster::ConfusionCounts rc =
            raster::pixel_counts(raster::dilate(pred_mask, radius), raster::dilate(gt_mask, radius));
        res.relaxed.emplace_back(
            radius,
            rc.union_area ? static_cast<double>(rc.intersection) / static_cast<double>(rc.union_area)
                          : 0.0);
    }
    return res;
}

InstanceResult unmatched_result(const dataset::GtInstance& gt_inst, const std::vector<int>& radii) {
    InstanceResult res;
    res.instance_id = gt_inst.instance_id;
    res.image_id = gt_inst.image_id;
    res.scene = gt_inst.scene;
    for (int radius : radii) res.relaxed.emplace_back(radius, 0.0);
    return res;
}

} // namespace

EvalResult evaluate(const dataset::GroundTruth& gt, const dataset::PredictionSet& preds,
                    const EvalConfig& cfg) {
    cfg.map_grid.validate();
    if (!cfg.relaxed_radii.empty() && cfg.relaxed_radii.front() != 0) {
        throw ConfigError("relaxed radii must start at 0");
    }
    for (std::size_t i = 1; i < cfg.relaxed_radii.size(); ++i) {
        if (cfg.relaxed_radii[i] <= cfg.relaxed_radii[i - 1]) {
            throw ConfigError("relaxed radii must be strictly increasing");
        }
    }
    for (const auto& [image_id, list] : preds.by_image) {
        if (gt.find_image(image_id) == nullptr) {
            throw ReferentialIntegrityError("predictions reference image id " +
                                            std::to_string(image_id) + " absent from ground truth");
        }
    }

    EvalResult out;
    out.config = cfg;
    std::map<std::int64_t, std::vector<dataset::Detection>> det_map;
    std::map<std::int64_t, std::vector<dataset::GtInstance>> gt_map;

    for (std::size_t idx = 0; idx < gt.images.size(); ++idx) {
        const dataset::GtImage& image = gt.images[idx];
        const auto& image_preds = predictions_for(preds, image.id);
        out.detection_count += image_preds.size();

        std::vector<dataset::Detection> detections;
        detections.reserve(image_preds.size());
        for (const auto& p : image_preds) detections.push_back(p.detection);

        MatchSet ms = match_instances(detections, gt.instances[idx], cfg.match_threshold);
        std::map<std::int64_t, const MatchPair*> by_gt;
        for (const auto& pair : ms.pairs) by_gt[pair.gt_instance_id] = &pair;

        for (const dataset::GtInstance& inst : gt.instances[idx]) {
            auto hit = by_gt.find(inst.instance_id);
            if (hit == by_gt.end()) {
                out.instances.push_back(unmatched_result(inst, cfg.relaxed_radii));
            } else {
                out.instances.push_back(scored_pair(inst, image_preds[hit->second->detection_index],
                                                    image, hit->second->box_iou, cfg.relaxed_radii));
            }
        }
        out.matchsets.push_back(std::move(ms));

        if (!gt.instances[idx].empty()) gt_map[image.id] = gt.instances[idx];
        if (!detections.empty()) det_map[image.id] = std::move(detections);
    }

    out.map = coco_map(det_map, gt_map, cfg.map_grid);
    return out;
}

} // namespace maskbench::metrics
