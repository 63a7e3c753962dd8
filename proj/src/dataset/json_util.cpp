#include "maskbench/dataset/json_util.hpp"

#include <fstream>

#include "maskbench/core/error.hpp"

namespace maskbench::dataset {

raster::BBox json_to_bbox(const json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 4 ||
        !std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_number(); }))
        throw ParseError(context + ": bbox must be a [x, y, w, h] number array");
    raster::BBox box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                     j[3].get<double>()};
    try {
        raster::validate_bbox(box);
    } catch (const Error& e) {
        throw ParseError(context + ": " + e.what());
    }
    return box;
}

json bbox_to_json(const raster::BBox& box) {
    return json::array({box.x, box.y, box.w, box.h});
}

raster::RleMask json_to_rle(const json& j, const std::string& context) {
    if (!j.is_object() || !j.contains("size") || !j.contains("counts"))
        throw ParseError(context + ": segmentation must be {size:[h,w], counts:[...]}");
    const json& size = j["size"];
    if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() ||
        !size[1].is_number_integer())
        throw ParseError(context + ": segmentation size must be [height, width]");
    const json& counts = j["counts"];
    if (!counts.is_array())
        throw ParseError(context + ": segmentation counts must be an array");

    raster::RleMask rle;
    rle.height = size[0].get<int>();
    rle.width = size[1].get<int>();
    for (const json& c : counts) {
        if (!c.is_number_integer() || c.get<std::int64_t>() < 0)
            throw ParseError(context + ": RLE counts must be non-negative integers");
        rle.counts.push_back(c.get<std::uint64_t>());
    }
    return rle;
}

json rle_to_json(const raster::RleMask& rle) {
    json j;
    j["size"] = json::array({rle.height, rle.width});
    j["counts"] = rle.counts;
    return j;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path);
}

} // namespace maskbench::dataset
