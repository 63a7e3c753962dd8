#include "maskbench/dataset/types.hpp"

#include <algorithm>
#include <cstdio>

namespace maskbench::dataset {

std::string to_string(SceneTag tag) {
    switch (tag) {
        case SceneTag::Inshore: return "inshore";
        case SceneTag::Offshore: return "offshore";
        case SceneTag::Unknown: break;
    }
    return "unknown";
}

SceneTag scene_tag_from_string(const std::string& value) {
    if (value == "inshore") return SceneTag::Inshore;
    if (value == "offshore") return SceneTag::Offshore;
    return SceneTag::Unknown;
}

const GtImage* GroundTruth::find_image(std::int64_t image_id) const {
    auto it = std::lower_bound(images.begin(), images.end(), image_id,
                               [](const GtImage& image, std::int64_t id) { return image.id < id; });
    if (it == images.end() || it->id != image_id) return nullptr;
    return &*it;
}

std::size_t GroundTruth::total_instances() const {
    std::size_t n = 0;
    for (const auto& list : instances) n += list.size();
    return n;
}

// FNV-1a over the identity of the dataset (image ids and instance ids in
// sorted order). Geometry is deliberately excluded: two runs are comparable
// when they scored the same instances, not byte-identical annotation files.
std::string GroundTruth::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffULL;
            h *= 0x100000001b3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(total_instances()));
    for (std::size_t idx = 0; idx < images.size(); ++idx) {
        mix(static_cast<std::uint64_t>(images[idx].id));
        for (const auto& inst : instances[idx]) {
            mix(static_cast<std::uint64_t>(inst.instance_id));
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace maskbench::dataset
