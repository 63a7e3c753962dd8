#pragma once

#include <string>

#include "maskbench/dataset/types.hpp"

namespace maskbench::dataset {

// COCO-layout ground truth: "images" with id/width/height, "annotations" with
// bbox [x,y,w,h] and "segmentation" as flat [x1,y1,x2,y2,...] polygon arrays.
// The optional sidecar maps stringified image ids to scene tags; images
// without a tag are Unknown.
GroundTruth load_ground_truth(const std::string& annotation_path,
                              const std::string& scene_tag_path = "");

void write_ground_truth(const GroundTruth& gt, const std::string& path);
void write_scene_tags(const GroundTruth& gt, const std::string& path);

// COCO-results-layout JSON array: {image_id, bbox, score, segmentation?,
// quality?}. Records without segmentation get a box-filled mask, flagged as
// synthesized. Score is mandatory.
PredictionSet load_predictions(const std::string& results_path, const GroundTruth& gt);

void write_predictions(const PredictionSet& preds, const std::string& path);

} // namespace maskbench::dataset
