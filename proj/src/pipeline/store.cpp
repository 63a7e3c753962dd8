#include "maskbench/pipeline/store.hpp"

#include <string>

#include "maskbench/dataset/coco_io.hpp"
#include "maskbench/dataset/json_util.hpp"
#include "maskbench/dataset/synthetic.hpp"
#include "maskbench/raster/ops.hpp"

namespace maskbench::pipeline {

const std::vector<PredictionStore::StoredPrediction> PredictionStore::kEmpty;

namespace {

using dataset::json;

MaskCandidate candidate_from_json(const json& jc, const std::string& where) {
    if (!jc.is_object() || !jc.contains("segmentation")) {
        throw ParseError(where + ": candidate needs a segmentation");
    }
    MaskCandidate cand;
    cand.mask = dataset::json_to_rle(jc["segmentation"], where);
    if (jc.contains("quality")) {
        if (!jc["quality"].is_number()) throw ParseError(where + ": quality must be a number");
        cand.quality = jc["quality"].get<double>();
        if (!(cand.quality >= 0.0 && cand.quality <= 1.0)) {
            throw ParseError(where + ": quality must lie in [0, 1]");
        }
    } else {
        cand.quality = 1.0;
    }
    return cand;
}

} // namespace

PredictionStore PredictionStore::from_file(const std::string& predictions_path,
                                           const dataset::GroundTruth& gt) {
    // Load through the standard reader first so every schema and referential
    // check applies, then take a second pass for the candidates extension.
    dataset::PredictionSet base = dataset::load_predictions(predictions_path, gt);
    json root = dataset::read_json_file(predictions_path);

    PredictionStore store;
    std::map<std::int64_t, std::size_t> cursor;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const json& jr = root[i];
        std::int64_t image_id = jr["image_id"].get<std::int64_t>();
        const dataset::PredictedInstance& inst = base.by_image.at(image_id)[cursor[image_id]++];

        StoredPrediction stored;
        stored.detection = inst.detection;
        if (jr.contains("candidates")) {
            std::string where = predictions_path + ": [" + std::to_string(i) + "]";
            if (!jr["candidates"].is_array() || jr["candidates"].empty()) {
                throw ParseError(where + ": candidates must be a non-empty array");
            }
            const dataset::GtImage* image = gt.find_image(image_id);
            for (std::size_t c = 0; c < jr["candidates"].size(); ++c) {
                std::string cwhere = where + ".candidates[" + std::to_string(c) + "]";
                MaskCandidate cand = candidate_from_json(jr["candidates"][c], cwhere);
                if (cand.mask.height != image->height || cand.mask.width != image->width) {
                    throw MalformedRleError(cwhere + ": candidate mask size mismatches image " +
                                                     std::to_string(image_id));
                }
                stored.candidates.push_back(std::move(cand));
            }
        } else {
            stored.candidates.push_back({inst.mask, inst.quality});
        }
        store.by_image_[image_id].push_back(std::move(stored));
    }
    return store;
}

PredictionStore PredictionStore::from_perturbation(const dataset::GroundTruth& gt,
                                                   const dataset::PerturbationSpec& spec) {
    dataset::PredictionSet perturbed = dataset::perturb_gt(gt, spec);
    PredictionStore store;
    for (const auto& [image_id, list] : perturbed.by_image) {
        auto& out = store.by_image_[image_id];
        out.reserve(list.size());
        for (const auto& inst : list) {
            StoredPrediction stored;
            stored.detection = inst.detection;
            stored.candidates.push_back({inst.mask, inst.quality});
            out.push_back(std::move(stored));
        }
    }
    return store;
}

const std::vector<PredictionStore::StoredPrediction>& PredictionStore::for_image(
    std::int64_t image_id) const {
    auto it = by_image_.find(image_id);
    return it == by_image_.end() ? kEmpty : it->second;
}

const PredictionStore::StoredPrediction* PredictionStore::find_by_box(std::int64_t image_id,
                                                                      const raster::BBox& box) const {
    for (const StoredPrediction& stored : for_image(image_id)) {
        const raster::BBox& b = stored.detection.bbox;
        if (b.x == box.x && b.y == box.y && b.w == box.w && b.h == box.h) return &stored;
    }
    return nullptr;
}

std::vector<dataset::Detection> StoreDetector::detect(const ImageRef& image) {
    std::vector<dataset::Detection> out;
    for (const auto& stored : store_->for_image(image.image_id)) {
        out.push_back(stored.detection);
    }
    return out;
}

std::vector<MaskCandidate> StoreSegmenter::segment(const ImageRef& image, const raster::BBox& box) {
    const auto* stored = store_->find_by_box(image.image_id, box);
    if (stored == nullptr || stored->candidates.empty()) {
        throw EmptyCandidateError("no stored mask for prompt box [" + std::to_string(box.x) + ", " +
                                  std::to_string(box.y) + ", " + std::to_string(box.w) + ", " +
                                  std::to_string(box.h) + "] on image " + std::to_string(image.image_id));
    }
    return stored->candidates;
}

} // namespace maskbench::pipeline
