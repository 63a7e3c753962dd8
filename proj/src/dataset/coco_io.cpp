#include "maskbench/dataset/coco_io.hpp"

#include <algorithm>
#include <filesystem>
#include <string>

#include "maskbench/dataset/json_util.hpp"
#include "maskbench/raster/ops.hpp"

namespace maskbench::dataset {

using raster::BBox;
using raster::Polygon;

namespace {

Polygon json_to_polygon(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() < 6 || j.size() % 2 != 0) {
        throw ParseError(where + ": polygon must be a flat [x1,y1,...] array with at least 3 vertices");
    }
    Polygon poly;
    poly.vertices.reserve(j.size() / 2);
    for (std::size_t i = 0; i + 1 < j.size(); i += 2) {
        if (!j[i].is_number() || !j[i + 1].is_number()) {
            throw ParseError(where + ": polygon coordinates must be numbers");
        }
        poly.vertices.push_back({j[i].get<double>(), j[i + 1].get<double>()});
    }
    raster::validate_polygon(poly);
    return poly;
}

json polygon_to_json(const Polygon& poly) {
    json flat = json::array();
    for (const auto& v : poly.vertices) {
        flat.push_back(v.x);
        flat.push_back(v.y);
    }
    return flat;
}

// A vertex may poke marginally past its bbox due to annotation rounding; more
// than one pixel of overhang means the box and the outline disagree.
bool bbox_encloses(const BBox& box, const Polygon& poly, double slack) {
    for (const auto& v : poly.vertices) {
        if (v.x < box.x - slack || v.x > box.x + box.w + slack ||
            v.y < box.y - slack || v.y > box.y + box.h + slack) {
            return false;
        }
    }
    return true;
}

SceneTag parse_scene_tag(const std::string& value, const std::string& where) {
    SceneTag tag = scene_tag_from_string(value);
    if (tag == SceneTag::Unknown && value != "unknown") {
        throw ParseError(where + ": scene tag must be \"inshore\" or \"offshore\", got \"" + value + "\"");
    }
    return tag;
}

void apply_scene_tags(GroundTruth& gt, const std::string& scene_tag_path) {
    json tags = read_json_file(scene_tag_path);
    if (!tags.is_object()) {
        throw ParseError(scene_tag_path + ": scene tag file must be a JSON object");
    }
    for (const auto& [key, value] : tags.items()) {
        std::int64_t image_id = 0;
        try {
            std::size_t pos = 0;
            image_id = std::stoll(key, &pos);
            if (pos != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw ParseError(scene_tag_path + ": scene tag key \"" + key + "\" is not an image id");
        }
        if (!value.is_string()) {
            throw ParseError(scene_tag_path + ": scene tag for image " + key + " must be a string");
        }
        SceneTag tag = parse_scene_tag(value.get<std::string>(), scene_tag_path);
        const GtImage* image = gt.find_image(image_id);
        if (image == nullptr) {
            gt.warnings.push_back("scene tag for unknown image id " + key + " ignored");
            continue;
        }
        std::size_t idx = static_cast<std::size_t>(image - gt.images.data());
        for (auto& inst : gt.instances[idx]) {
            inst.scene = tag;
        }
    }
}

} // namespace

GroundTruth load_ground_truth(const std::string& annotation_path, const std::string& scene_tag_path) {
    json root = read_json_file(annotation_path);
    if (!root.is_object() || !root.contains("images") || !root.contains("annotations")) {
        throw ParseError(annotation_path + ": expected an object with \"images\" and \"annotations\"");
    }
    const json& images = root["images"];
    const json& annotations = root["annotations"];
    if (!images.is_array() || !annotations.is_array()) {
        throw ParseError(annotation_path + ": \"images\" and \"annotations\" must be arrays");
    }

    GroundTruth gt;
    gt.source_dir = std::filesystem::path(annotation_path).parent_path().string();
    gt.images.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        const json& jm = images[i];
        std::string where = annotation_path + ": images[" + std::to_string(i) + "]";
        if (!jm.is_object() || !jm.contains("id") || !jm.contains("width") || !jm.contains("height")) {
            throw ParseError(where + ": expected {id, width, height}");
        }
        if (!jm["id"].is_number_integer() || !jm["width"].is_number_integer() ||
            !jm["height"].is_number_integer()) {
            throw ParseError(where + ": id, width and height must be integers");
        }
        GtImage image;
        image.id = jm["id"].get<std::int64_t>();
        image.width = jm["width"].get<int>();
        image.height = jm["height"].get<int>();
        if (image.width <= 0 || image.height <= 0) {
            throw ParseError(where + ": image dimensions must be positive");
        }
        if (jm.contains("file_name")) {
            if (!jm["file_name"].is_string()) {
                throw ParseError(where + ": file_name must be a string");
            }
            image.file_name = jm["file_name"].get<std::string>();
        }
        gt.images.push_back(std::move(image));
    }
    std::sort(gt.images.begin(), gt.images.end(),
              [](const GtImage& a, const GtImage& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < gt.images.size(); ++i) {
        if (gt.images[i].id == gt.images[i - 1].id) {
            throw ParseError(annotation_path + ": duplicate image id " + std::to_string(gt.images[i].id));
        }
    }
    gt.instances.assign(gt.images.size(), {});

    std::int64_t next_auto_id = 1;
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        const json& ja = annotations[i];
        std::string where = annotation_path + ": annotations[" + std::to_string(i) + "]";
        if (!ja.is_object() || !ja.contains("image_id") || !ja.contains("bbox")) {
            throw ParseError(where + ": expected {image_id, bbox, segmentation}");
        }
        if (!ja["image_id"].is_number_integer()) {
            throw ParseError(where + ": image_id must be an integer");
        }
        GtInstance inst;
        inst.image_id = ja["image_id"].get<std::int64_t>();
        const GtImage* image = gt.find_image(inst.image_id);
        if (image == nullptr) {
            throw ReferentialIntegrityError(where + ": annotation references unknown image id " +
                                            std::to_string(inst.image_id));
        }
        if (ja.contains("id")) {
            if (!ja["id"].is_number_integer()) {
                throw ParseError(where + ": id must be an integer");
            }
            inst.instance_id = ja["id"].get<std::int64_t>();
        } else {
            inst.instance_id = next_auto_id;
        }
        next_auto_id = std::max(next_auto_id, inst.instance_id + 1);
        inst.bbox = json_to_bbox(ja["bbox"], where);
        if (!ja.contains("segmentation") || !ja["segmentation"].is_array() || ja["segmentation"].empty()) {
            throw ParseError(where + ": segmentation must be a non-empty array of polygons");
        }
        for (std::size_t p = 0; p < ja["segmentation"].size(); ++p) {
            inst.polygons.push_back(
                json_to_polygon(ja["segmentation"][p], where + ".segmentation[" + std::to_string(p) + "]"));
        }
        for (const auto& poly : inst.polygons) {
            if (!bbox_encloses(inst.bbox, poly, 1.0)) {
                gt.warnings.push_back("annotation " + std::to_string(inst.instance_id) + " on image " +
                                      std::to_string(inst.image_id) +
                                      " has polygon vertices outside its bbox");
                break;
            }
        }
        std::size_t idx = static_cast<std::size_t>(image - gt.images.data());
        gt.instances[idx].push_back(std::move(inst));
    }

    for (std::size_t idx = 0; idx < gt.instances.size(); ++idx) {
        auto& list = gt.instances[idx];
        std::sort(list.begin(), list.end(),
                  [](const GtInstance& a, const GtInstance& b) { return a.instance_id < b.instance_id; });
        for (std::size_t i = 1; i < list.size(); ++i) {
            if (list[i].instance_id == list[i - 1].instance_id) {
                throw ParseError(annotation_path + ": duplicate annotation id " +
                                 std::to_string(list[i].instance_id) + " on image " +
                                 std::to_string(gt.images[idx].id));
            }
        }
    }

    if (!scene_tag_path.empty()) {
        apply_scene_tags(gt, scene_tag_path);
    }
    return gt;
}

void write_ground_truth(const GroundTruth& gt, const std::string& annotation_path) {
    ordered_json root;
    root["images"] = ordered_json::array();
    for (const auto& image : gt.images) {
        ordered_json jm;
        jm["id"] = image.id;
        jm["width"] = image.width;
        jm["height"] = image.height;
        if (!image.file_name.empty()) jm["file_name"] = image.file_name;
        root["images"].push_back(std::move(jm));
    }
    root["annotations"] = ordered_json::array();
    for (const auto& list : gt.instances) {
        for (const auto& inst : list) {
            ordered_json ja;
            ja["id"] = inst.instance_id;
            ja["image_id"] = inst.image_id;
            ja["bbox"] = bbox_to_json(inst.bbox);
            ja["segmentation"] = ordered_json::array();
            for (const auto& poly : inst.polygons) {
                ja["segmentation"].push_back(ordered_json(polygon_to_json(poly)));
            }
            ja["category_id"] = 1;
            root["annotations"].push_back(std::move(ja));
        }
    }
    root["categories"] = ordered_json::array({ordered_json{{"id", 1}, {"name", "ship"}}});
    write_text_file(annotation_path, root.dump(2) + "\n");
}

void write_scene_tags(const GroundTruth& gt, const std::string& scene_tag_path) {
    ordered_json tags = ordered_json::object();
    for (std::size_t idx = 0; idx < gt.images.size(); ++idx) {
        SceneTag scene = SceneTag::Unknown;
        if (!gt.instances[idx].empty()) scene = gt.instances[idx].front().scene;
        if (scene == SceneTag::Unknown) continue;
        tags[std::to_string(gt.images[idx].id)] = to_string(scene);
    }
    write_text_file(scene_tag_path, tags.dump(2) + "\n");
}

PredictionSet load_predictions(const std::string& results_path, const GroundTruth& gt) {
    json root = read_json_file(results_path);
    if (!root.is_array()) {
        throw ParseError(results_path + ": expected a JSON array of prediction records");
    }
    PredictionSet preds;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const json& jr = root[i];
        std::string where = results_path + ": [" + std::to_string(i) + "]";
        if (!jr.is_object() || !jr.contains("image_id") || !jr.contains("bbox")) {
            throw ParseError(where + ": expected {image_id, bbox, score, ...}");
        }
        if (!jr["image_id"].is_number_integer()) {
            throw ParseError(where + ": image_id must be an integer");
        }
        PredictedInstance inst;
        inst.detection.image_id = jr["image_id"].get<std::int64_t>();
        const GtImage* image = gt.find_image(inst.detection.image_id);
        if (image == nullptr) {
            throw ReferentialIntegrityError(where + ": prediction references unknown image id " +
                                            std::to_string(inst.detection.image_id));
        }
        inst.detection.bbox = json_to_bbox(jr["bbox"], where);
        if (!jr.contains("score") || !jr["score"].is_number()) {
            throw ParseError(where + ": score is mandatory and must be a number");
        }
        inst.detection.score = jr["score"].get<double>();
        if (!(inst.detection.score >= 0.0 && inst.detection.score <= 1.0)) {
            throw ParseError(where + ": score must lie in [0, 1]");
        }
        if (jr.contains("quality")) {
            if (!jr["quality"].is_number()) {
                throw ParseError(where + ": quality must be a number");
            }
            inst.quality = jr["quality"].get<double>();
            if (!(inst.quality >= 0.0 && inst.quality <= 1.0)) {
                throw ParseError(where + ": quality must lie in [0, 1]");
            }
        } else {
            inst.quality = 1.0;
        }
        if (jr.contains("segmentation_failed") && jr["segmentation_failed"].is_boolean()) {
            inst.segmentation_failed = jr["segmentation_failed"].get<bool>();
        }
        if (jr.contains("segmentation")) {
            inst.mask = json_to_rle(jr["segmentation"], where);
            if (inst.mask.height != image->height || inst.mask.width != image->width) {
                throw MalformedRleError(where + ": mask is " + std::to_string(inst.mask.height) + "x" +
                                        std::to_string(inst.mask.width) + " but image " +
                                        std::to_string(image->id) + " is " + std::to_string(image->height) +
                                        "x" + std::to_string(image->width));
            }
            std::uint64_t total = 0;
            for (std::uint64_t c : inst.mask.counts) total += c;
            std::uint64_t expected =
                static_cast<std::uint64_t>(image->height) * static_cast<std::uint64_t>(image->width);
            if (total != expected) {
                throw MalformedRleError(where + ": RLE counts sum to " + std::to_string(total) +
                                        ", expected " + std::to_string(expected));
            }
        } else if (inst.segmentation_failed) {
            inst.mask.height = image->height;
            inst.mask.width = image->width;
            inst.mask.counts = {static_cast<std::uint64_t>(image->height) *
                                static_cast<std::uint64_t>(image->width)};
        } else {
            // Box-only record: stand in a filled-rectangle mask so pixel metrics
            // stay defined, and flag it so reports can call the degradation out.
            raster::BinaryMask box =
                raster::mask_from_bbox(inst.detection.bbox, image->width, image->height);
            inst.mask = raster::rle_encode(box);
            inst.box_mask = true;
        }
        preds.by_image[inst.detection.image_id].push_back(std::move(inst));
    }
    return preds;
}

void write_predictions(const PredictionSet& preds, const std::string& results_path) {
    ordered_json root = ordered_json::array();
    for (const auto& [image_id, list] : preds.by_image) {
        for (const auto& inst : list) {
            ordered_json jr;
            jr["image_id"] = image_id;
            jr["bbox"] = bbox_to_json(inst.detection.bbox);
            jr["score"] = inst.detection.score;
            if (inst.segmentation_failed) {
                jr["segmentation_failed"] = true;
            } else {
                jr["segmentation"] = rle_to_json(inst.mask);
            }
            jr["quality"] = inst.quality;
            if (inst.box_mask) jr["box_mask"] = true;
            root.push_back(std::move(jr));
        }
    }
    write_text_file(results_path, root.dump(2) + "\n");
}

} // namespace maskbench::dataset
