#pragma once

#include <string>

#include <json.hpp>

#include "maskbench/raster/types.hpp"

namespace maskbench::dataset {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Shared JSON shapes: bbox arrays [x,y,w,h] and RLE objects
// {"size":[h,w],"counts":[...]} appear in annotation files, prediction files
// and the external-backend wire protocol alike.

raster::BBox json_to_bbox(const json& j, const std::string& context);
json bbox_to_json(const raster::BBox& box);

raster::RleMask json_to_rle(const json& j, const std::string& context);
json rle_to_json(const raster::RleMask& rle);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace maskbench::dataset
