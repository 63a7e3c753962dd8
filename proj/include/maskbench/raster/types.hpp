#pragma once

#include <cstdint>
#include <vector>

#include "maskbench/core/error.hpp"

namespace maskbench::raster {

// Row-major binary raster. One byte per pixel, every element 0 or 1; packed
// storage is deliberately not part of the contract so equality stays
// byte-for-byte obvious.
class BinaryMask {
  public:
    BinaryMask() = default;

    BinaryMask(int width, int height)
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0) {
        if (width <= 0 || height <= 0) throw ShapeError("mask dimensions must be positive");
    }

    static BinaryMask from_data(int width, int height, std::vector<std::uint8_t> data);

    int width() const { return width_; }
    int height() const { return height_; }

    std::uint8_t at(int row, int col) const {
        return data_[static_cast<std::size_t>(row) * width_ + col];
    }
    void set(int row, int col, std::uint8_t v) {
        data_[static_cast<std::size_t>(row) * width_ + col] = v;
    }

    const std::vector<std::uint8_t>& data() const { return data_; }
    std::vector<std::uint8_t>& data() { return data_; }

    std::uint64_t area() const;

    bool same_shape(const BinaryMask& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool operator==(const BinaryMask& other) const = default;

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

// COCO-layout run-length coding: counts alternate runs of 0s and 1s over the
// column-major pixel traversal, starting with the 0-run (which may be empty).
struct RleMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint64_t> counts;
};

struct PointF {
    double x = 0.0;
    double y = 0.0;
};

// Closed polygon in continuous pixel coordinates. The closing edge from the
// last vertex back to the first is implicit.
struct Polygon {
    std::vector<PointF> vertices;
};

// Axis-aligned box, x-y-width-height convention, continuous coordinates.
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
};

struct ConfusionCounts {
    std::uint64_t intersection = 0;
    std::uint64_t pred_area = 0;
    std::uint64_t gt_area = 0;
    std::uint64_t union_area = 0;
};

void validate_polygon(const Polygon& poly);
void validate_bbox(const BBox& box);

} // namespace maskbench::raster
