#include "maskbench/dataset/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <string>

#include "maskbench/core/rng.hpp"
#include "maskbench/raster/ops.hpp"

namespace maskbench::dataset {

using raster::BBox;
using raster::Polygon;

namespace {

struct PlacedRect {
    std::int64_t x, y, w, h;
};

// Minimum Chebyshev distance between the pixel sets of two axis-aligned
// rectangles: the per-axis gaps are independent, so it is max(gap_x, gap_y).
std::int64_t chebyshev_gap(const PlacedRect& a, const PlacedRect& b) {
    std::int64_t gap_x = std::max<std::int64_t>(0, std::max(a.x, b.x) - std::min(a.x + a.w, b.x + b.w) + 1);
    std::int64_t gap_y = std::max<std::int64_t>(0, std::max(a.y, b.y) - std::min(a.y + a.h, b.y + b.h) + 1);
    return std::max(gap_x, gap_y);
}

Polygon rect_outline(const PlacedRect& r) {
    double x0 = static_cast<double>(r.x);
    double y0 = static_cast<double>(r.y);
    double x1 = static_cast<double>(r.x + r.w);
    double y1 = static_cast<double>(r.y + r.h);
    return Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

constexpr int kMaxPlacementAttempts = 1000;

} // namespace

std::vector<GtInstance> generate_synthetic(const SyntheticSceneSpec& spec,
                                           std::int64_t image_id,
                                           std::int64_t first_instance_id) {
    if (spec.width <= 0 || spec.height <= 0) {
        throw GenerationError("scene dimensions must be positive, got " + std::to_string(spec.width) +
                              "x" + std::to_string(spec.height));
    }
    if (spec.ship_count < 0) {
        throw GenerationError("ship count must be non-negative, got " + std::to_string(spec.ship_count));
    }
    if (spec.ship_w_min <= 0 || spec.ship_h_min <= 0 || spec.ship_w_max < spec.ship_w_min ||
        spec.ship_h_max < spec.ship_h_min) {
        throw GenerationError("ship size range is empty or non-positive");
    }
    if (spec.min_separation < 0 || spec.margin < 0) {
        throw GenerationError("min_separation and margin must be non-negative");
    }

    std::mt19937_64 rng(spec.seed);
    std::vector<PlacedRect> placed;
    placed.reserve(static_cast<std::size_t>(spec.ship_count));
    for (int s = 0; s < spec.ship_count; ++s) {
        bool ok = false;
        for (int attempt = 0; attempt < kMaxPlacementAttempts && !ok; ++attempt) {
            PlacedRect r;
            r.w = maskbench::rand_int(rng, spec.ship_w_min, spec.ship_w_max);
            r.h = maskbench::rand_int(rng, spec.ship_h_min, spec.ship_h_max);
            std::int64_t x_hi = spec.width - spec.margin - r.w;
            std::int64_t y_hi = spec.height - spec.margin - r.h;
            if (x_hi < spec.margin || y_hi < spec.margin) {
                throw GenerationError("ship of size " + std::to_string(r.w) + "x" + std::to_string(r.h) +
                                      " with margin " + std::to_string(spec.margin) +
                                      " does not fit in a " + std::to_string(spec.width) + "x" +
                                      std::to_string(spec.height) + " scene");
            }
            r.x = maskbench::rand_int(rng, spec.margin, x_hi);
            r.y = maskbench::rand_int(rng, spec.margin, y_hi);
            ok = std::all_of(placed.begin(), placed.end(), [&](const PlacedRect& other) {
                return chebyshev_gap(r, other) >= spec.min_separation;
            });
            if (ok) placed.push_back(r);
        }
        if (!ok) {
            throw GenerationError("could not place ship " + std::to_string(s + 1) + " of " +
                                  std::to_string(spec.ship_count) + " with min separation " +
                                  std::to_string(spec.min_separation) + " in a " +
                                  std::to_string(spec.width) + "x" + std::to_string(spec.height) +
                                  " scene after " + std::to_string(kMaxPlacementAttempts) + " attempts");
        }
    }

    std::vector<GtInstance> instances;
    instances.reserve(placed.size());
    for (std::size_t s = 0; s < placed.size(); ++s) {
        GtInstance inst;
        inst.instance_id = first_instance_id + static_cast<std::int64_t>(s);
        inst.image_id = image_id;
        inst.bbox = BBox{static_cast<double>(placed[s].x), static_cast<double>(placed[s].y),
                         static_cast<double>(placed[s].w), static_cast<double>(placed[s].h)};
        inst.polygons.push_back(rect_outline(placed[s]));
        inst.scene = spec.scene;
        instances.push_back(std::move(inst));
    }
    return instances;
}

GroundTruth generate_synthetic_dataset(const SyntheticDatasetSpec& spec) {
    if (spec.image_count < 0) {
        throw GenerationError("image count must be non-negative, got " + std::to_string(spec.image_count));
    }
    if (spec.ships_min < 0 || spec.ships_max < spec.ships_min) {
        throw GenerationError("ship count range is empty or negative");
    }
    GroundTruth gt;
    gt.images.reserve(static_cast<std::size_t>(spec.image_count));
    gt.instances.reserve(static_cast<std::size_t>(spec.image_count));
    std::int64_t next_instance_id = 1;
    for (int i = 0; i < spec.image_count; ++i) {
        std::mt19937_64 count_rng(maskbench::derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
        SyntheticSceneSpec scene = spec.scene;
        scene.ship_count =
            static_cast<int>(maskbench::rand_int(count_rng, spec.ships_min, spec.ships_max));
        scene.seed = maskbench::derive_seed(spec.seed, static_cast<std::uint64_t>(i), 1);
        if (spec.mixed_scenes) {
            scene.scene = (i % 2 == 0) ? SceneTag::Offshore : SceneTag::Inshore;
        }
        GtImage image;
        image.id = i + 1;
        image.width = scene.width;
        image.height = scene.height;
        char name[32];
        std::snprintf(name, sizeof(name), "%06d.pgm", i + 1);
        image.file_name = name;
        gt.instances.push_back(generate_synthetic(scene, image.id, next_instance_id));
        next_instance_id += static_cast<std::int64_t>(gt.instances.back().size());
        gt.images.push_back(std::move(image));
    }
    return gt;
}

PredictionSet perturb_gt(const GroundTruth& gt, const PerturbationSpec& spec) {
    if (spec.shift < 0) {
        throw GenerationError("shift must be non-negative, got " + std::to_string(spec.shift));
    }
    if (!(spec.drop_rate >= 0.0 && spec.drop_rate <= 1.0)) {
        throw GenerationError("drop_rate must lie in [0, 1]");
    }
    PredictionSet preds;
    for (std::size_t idx = 0; idx < gt.images.size(); ++idx) {
        const GtImage& image = gt.images[idx];
        std::vector<PredictedInstance> list;
        for (const GtInstance& inst : gt.instances[idx]) {
            std::mt19937_64 rng(maskbench::derive_seed(spec.seed,
                                                  static_cast<std::uint64_t>(inst.image_id),
                                                  static_cast<std::uint64_t>(inst.instance_id)));
            if (maskbench::rand_unit(rng) < spec.drop_rate) continue;

            PredictedInstance pred;
            pred.detection.image_id = inst.image_id;
            double x0 = std::clamp(inst.bbox.x + spec.shift, 0.0, static_cast<double>(image.width));
            double x1 = std::clamp(inst.bbox.x + inst.bbox.w + spec.shift, 0.0,
                                   static_cast<double>(image.width));
            if (x1 <= x0) continue; // shifted clean out of frame
            pred.detection.bbox = BBox{x0, inst.bbox.y, x1 - x0, inst.bbox.h};
            // [0.5, 1.0): all perturbed detections survive the default
            // confidence filter, keeping zero-perturbation runs a fixed point.
            pred.detection.score = 0.5 + 0.5 * maskbench::rand_unit(rng);
            pred.quality = 1.0;

            std::vector<Polygon> shifted = inst.polygons;
            for (auto& poly : shifted) {
                for (auto& v : poly.vertices) v.x += spec.shift;
            }
            raster::BinaryMask mask = raster::rasterize_polygons(shifted, image.width, image.height);
            pred.mask = raster::rle_encode(mask);
            list.push_back(std::move(pred));
        }
        if (!list.empty()) preds.by_image[image.id] = std::move(list);
    }
    return preds;
}

raster::BinaryMask render_scene(const GroundTruth& gt, std::size_t image_index) {
    if (image_index >= gt.images.size()) {
        throw ShapeError("image index " + std::to_string(image_index) + " out of range (dataset has " +
                         std::to_string(gt.images.size()) + " images)");
    }
    const GtImage& image = gt.images[image_index];
    raster::BinaryMask out(image.width, image.height);
    for (const GtInstance& inst : gt.instances[image_index]) {
        raster::BinaryMask one = raster::rasterize_polygons(inst.polygons, image.width, image.height);
        for (std::size_t i = 0; i < one.data().size(); ++i) {
            if (one.data()[i]) out.data()[i] = 1;
        }
    }
    return out;
}

} // namespace maskbench::dataset
