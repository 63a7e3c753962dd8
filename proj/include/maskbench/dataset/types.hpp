#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "maskbench/raster/types.hpp"

namespace maskbench::dataset {

enum class SceneTag { Inshore, Offshore, Unknown };

std::string to_string(SceneTag tag);
SceneTag scene_tag_from_string(const std::string& s);

struct GtImage {
    std::int64_t id = 0;
    int width = 0;
    int height = 0;
    std::string file_name;
};

// One annotated instance: bounding box plus one or more polygon rings.
struct GtInstance {
    std::int64_t instance_id = 0;
    std::int64_t image_id = 0;
    raster::BBox bbox;
    std::vector<raster::Polygon> polygons;
    SceneTag scene = SceneTag::Unknown;
};

struct Detection {
    std::int64_t image_id = 0;
    raster::BBox bbox;
    double score = 0.0;
};

// A detection with its selected mask. The mask is kept run-length coded;
// instances are small relative to their images so this stays compact.
struct PredictedInstance {
    Detection detection;
    raster::RleMask mask;
    double quality = 0.0;
    // Mask was synthesized from the box because the source had no
    // segmentation. Reports can exclude these.
    bool box_mask = false;
    // The segmenter returned zero candidates; the detection still counts for
    // matching but carries no mask.
    bool segmentation_failed = false;
};

// Ground truth for a set of images. Images are sorted by id and instances by
// instance id; the structure is immutable after loading.
struct GroundTruth {
    std::vector<GtImage> images;
    std::vector<std::vector<GtInstance>> instances; // parallel to `images`
    std::vector<std::string> warnings;
    std::string source_dir;

    const GtImage* find_image(std::int64_t image_id) const;
    std::size_t total_instances() const;
    // 64-bit digest over image ids and instance ids; two runs are comparable
    // only when their digests agree.
    std::string digest() const;
};

struct PredictionSet {
    std::map<std::int64_t, std::vector<PredictedInstance>> by_image;
};

struct SyntheticSceneSpec {
    int width = 64;
    int height = 64;
    int ship_count = 1;
    int ship_w_min = 6, ship_w_max = 16;
    int ship_h_min = 3, ship_h_max = 8;
    int min_separation = 2;
    // Keep-out border so downstream perturbations stay inside the image.
    int margin = 0;
    SceneTag scene = SceneTag::Unknown;
    std::uint64_t seed = 0;
};

struct SyntheticDatasetSpec {
    int image_count = 20;
    int ships_min = 1, ships_max = 4;
    SyntheticSceneSpec scene; // per-image template; ship_count is drawn per image
    // mixed = true alternates inshore/offshore by image index.
    bool mixed_scenes = true;
    std::uint64_t seed = 0;
};

struct PerturbationSpec {
    int shift = 0;          // horizontal translation, pixels
    double drop_rate = 0.0; // fraction of instances removed
    std::uint64_t seed = 0;
};

} // namespace maskbench::dataset
