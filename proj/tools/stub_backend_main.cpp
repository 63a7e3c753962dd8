// Minimal line-oriented backend partner: reads one JSON request per line on
// stdin, answers one JSON response per line on stdout. Used to exercise the
// external-process backend end to end without a real model. Detection answers
// come from a ground-truth file; segmentation answers fill the prompt box.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "maskbench/dataset/coco_io.hpp"
#include "maskbench/raster/ops.hpp"

using nlohmann::json;

namespace {

// "data/images/000037.pgm" -> 37. The harness hands us file paths, not ids.
std::int64_t image_id_from_path(const std::string& path) {
    std::size_t slash = path.find_last_of('/');
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    std::string digits;
    for (char c : base) {
        if (c >= '0' && c <= '9') digits += c;
    }
    if (digits.empty()) {
        throw std::runtime_error("image path carries no numeric id: " + path);
    }
    return std::stoll(digits);
}

json rle_to_json(const maskbench::raster::RleMask& rle) {
    json counts = json::array();
    for (std::uint64_t c : rle.counts) counts.push_back(c);
    return json{{"size", {rle.height, rle.width}}, {"counts", counts}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"line-oriented stub segmentation backend"};
    std::string gt_path;
    int malformed_at = 0;
    double score = 0.9;
    double quality = 0.9;
    app.add_option("--gt", gt_path, "Ground truth whose boxes the stub detects")->required();
    app.add_option("--malformed", malformed_at, "Emit a non-JSON response to request N (1-based)");
    app.add_option("--score", score, "Confidence reported for every detection");
    app.add_option("--quality", quality, "Quality reported for every candidate");
    CLI11_PARSE(app, argc, argv);

    maskbench::dataset::GroundTruth gt;
    try {
        gt = maskbench::dataset::load_ground_truth(gt_path);
    } catch (const std::exception& e) {
        std::cerr << "stub-backend: " << e.what() << "\n";
        return 2;
    }

    std::string line;
    int request_no = 0;
    while (std::getline(std::cin, line)) {
        ++request_no;
        if (malformed_at == request_no) {
            std::cout << "this is not json\n" << std::flush;
            continue;
        }
        try {
            json request = json::parse(line);
            std::string type = request.at("type").get<std::string>();
            std::int64_t id = image_id_from_path(request.at("image").get<std::string>());
            const maskbench::dataset::GtImage* image = gt.find_image(id);
            if (image == nullptr) {
                throw std::runtime_error("unknown image id " + std::to_string(id));
            }
            std::size_t index = static_cast<std::size_t>(image - gt.images.data());

            json response;
            if (type == "detect") {
                json detections = json::array();
                for (const auto& inst : gt.instances[index]) {
                    detections.push_back(
                        {{"bbox", {inst.bbox.x, inst.bbox.y, inst.bbox.w, inst.bbox.h}},
                         {"score", score}});
                }
                response["detections"] = detections;
            } else if (type == "segment") {
                const json& b = request.at("bbox");
                maskbench::raster::BBox box{b.at(0).get<double>(), b.at(1).get<double>(),
                                            b.at(2).get<double>(), b.at(3).get<double>()};
                maskbench::raster::BinaryMask mask =
                    maskbench::raster::mask_from_bbox(box, image->width, image->height);
                response["candidates"] = json::array(
                    {{{"segmentation", rle_to_json(maskbench::raster::rle_encode(mask))},
                      {"quality", quality}}});
            } else {
                throw std::runtime_error("unknown request type \"" + type + "\"");
            }
            std::cout << response.dump() << "\n" << std::flush;
        } catch (const std::exception& e) {
            std::cerr << "stub-backend: request " << request_no << ": " << e.what() << "\n";
            return 1;
        }
    }
    return 0;
}
