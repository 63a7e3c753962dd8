#include "maskbench/raster/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace maskbench::raster {

namespace {

// First pixel column whose center is >= x, i.e. smallest j with j + 0.5 >= x.
long long first_center_at_or_after(double x) {
    return static_cast<long long>(std::ceil(x - 0.5));
}

// One past the last pixel column whose center is < x, i.e. smallest j with
// j + 0.5 >= x under strict inequality j + 0.5 < x.
long long end_center_before(double x) {
    return static_cast<long long>(std::ceil(x - 0.5));
}

int clamp_index(long long v, int size) {
    if (v < 0) return 0;
    if (v > size) return size;
    return static_cast<int>(v);
}

// 1D pass: distance (in steps along the scan) to the nearest set pixel.
// `stride` walks rows or columns over the same flat buffer.
void line_distance(const std::uint8_t* in, int* dist, int n, int stride) {
    constexpr int far_away = std::numeric_limits<int>::max() / 2;
    int d = far_away;
    for (int i = 0; i < n; ++i) {
        d = in[static_cast<std::size_t>(i) * stride] ? 0 : (d >= far_away ? far_away : d + 1);
        dist[i] = d;
    }
    d = far_away;
    for (int i = n - 1; i >= 0; --i) {
        d = in[static_cast<std::size_t>(i) * stride] ? 0 : (d >= far_away ? far_away : d + 1);
        dist[i] = std::min(dist[i], d);
    }
}

} // namespace

BinaryMask BinaryMask::from_data(int width, int height, std::vector<std::uint8_t> data) {
    BinaryMask m(width, height);
    if (data.size() != m.data_.size())
        throw ShapeError("mask data length does not match width * height");
    for (std::uint8_t v : data)
        if (v > 1) throw ShapeError("mask elements must be 0 or 1");
    m.data_ = std::move(data);
    return m;
}

std::uint64_t BinaryMask::area() const {
    return std::accumulate(data_.begin(), data_.end(), std::uint64_t{0});
}

void validate_polygon(const Polygon& poly) {
    if (poly.vertices.size() < 3)
        throw DegeneratePolygonError("polygon has fewer than 3 vertices");
    for (const PointF& p : poly.vertices) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw DegeneratePolygonError("polygon vertex is not finite");
        if (p.x < 0.0 || p.y < 0.0)
            throw DegeneratePolygonError("polygon vertex has negative coordinates");
    }
}

void validate_bbox(const BBox& box) {
    if (!std::isfinite(box.x) || !std::isfinite(box.y) || !std::isfinite(box.w) ||
        !std::isfinite(box.h))
        throw ShapeError("bbox coordinates must be finite");
    if (box.w <= 0.0 || box.h <= 0.0)
        throw ShapeError("bbox width and height must be positive");
}

BinaryMask rasterize_polygon(const Polygon& poly, int width, int height) {
    validate_polygon(poly);
    if (width <= 0 || height <= 0) throw ShapeError("image dimensions must be positive");

    BinaryMask mask(width, height);
    const auto& vs = poly.vertices;
    const std::size_t n = vs.size();

    double y_min = vs[0].y, y_max = vs[0].y;
    for (const PointF& p : vs) {
        y_min = std::min(y_min, p.y);
        y_max = std::max(y_max, p.y);
    }
    const int row_begin = clamp_index(first_center_at_or_after(y_min), height);
    const int row_end = clamp_index(end_center_before(y_max), height);

    std::vector<double> xs;
    for (int row = row_begin; row < row_end; ++row) {
        const double yc = row + 0.5;
        xs.clear();
        for (std::size_t k = 0; k < n; ++k) {
            const PointF& p = vs[k];
            const PointF& q = vs[(k + 1) % n];
            // Half-open vertical rule: an edge contributes one crossing when
            // the scanline separates its endpoints. Horizontal edges never do.
            if ((p.y > yc) != (q.y > yc))
                xs.push_back(p.x + (yc - p.y) * (q.x - p.x) / (q.y - p.y));
        }
        std::sort(xs.begin(), xs.end());
        // Even-odd fill: pixel centers in [xs[2k], xs[2k+1]) are inside.
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            const int col_begin = clamp_index(first_center_at_or_after(xs[k]), width);
            const int col_end = clamp_index(end_center_before(xs[k + 1]), width);
            for (int col = col_begin; col < col_end; ++col) mask.set(row, col, 1);
        }
    }
    return mask;
}

BinaryMask rasterize_polygons(std::span<const Polygon> polys, int width, int height) {
    BinaryMask out(width, height);
    for (const Polygon& poly : polys) {
        const BinaryMask part = rasterize_polygon(poly, width, height);
        for (int row = 0; row < height; ++row)
            for (int col = 0; col < width; ++col)
                if (part.at(row, col)) out.set(row, col, 1);
    }
    return out;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
    if (radius < 0) throw ShapeError("dilation radius must be non-negative");
    if (radius == 0) return mask;

    const int w = mask.width();
    const int h = mask.height();

    // The square element separates into a horizontal and a vertical segment;
    // each 1D dilation is a threshold on the 1D distance transform.
    BinaryMask rows(w, h);
    std::vector<int> dist(std::max(w, h));
    for (int r = 0; r < h; ++r) {
        line_distance(&mask.data()[static_cast<std::size_t>(r) * w], dist.data(), w, 1);
        for (int c = 0; c < w; ++c) rows.set(r, c, dist[c] <= radius ? 1 : 0);
    }
    BinaryMask out(w, h);
    for (int c = 0; c < w; ++c) {
        line_distance(&rows.data()[c], dist.data(), h, w);
        for (int r = 0; r < h; ++r) out.set(r, c, dist[r] <= radius ? 1 : 0);
    }
    return out;
}

RleMask rle_encode(const BinaryMask& mask) {
    RleMask rle;
    rle.height = mask.height();
    rle.width = mask.width();

    std::uint8_t current = 0;
    std::uint64_t run = 0;
    for (int col = 0; col < mask.width(); ++col) {
        for (int row = 0; row < mask.height(); ++row) {
            const std::uint8_t v = mask.at(row, col);
            if (v == current) {
                ++run;
            } else {
                rle.counts.push_back(run);
                current = v;
                run = 1;
            }
        }
    }
    rle.counts.push_back(run);
    return rle;
}

BinaryMask rle_decode(const RleMask& rle) {
    if (rle.height <= 0 || rle.width <= 0)
        throw MalformedRleError("RLE dimensions must be positive");

    const std::uint64_t total =
        static_cast<std::uint64_t>(rle.height) * static_cast<std::uint64_t>(rle.width);
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < rle.counts.size(); ++i) {
        if (i > 0 && i + 1 < rle.counts.size() && rle.counts[i] == 0)
            throw MalformedRleError("RLE has a zero-length interior run");
        sum += rle.counts[i];
    }
    if (sum != total)
        throw MalformedRleError("RLE counts sum to " + std::to_string(sum) + ", expected " +
                                std::to_string(total));

    BinaryMask mask(rle.width, rle.height);
    std::uint64_t k = 0;
    std::uint8_t value = 0;
    for (std::uint64_t count : rle.counts) {
        for (std::uint64_t i = 0; i < count; ++i, ++k) {
            const int col = static_cast<int>(k / rle.height);
            const int row = static_cast<int>(k % rle.height);
            mask.set(row, col, value);
        }
        value ^= 1;
    }
    return mask;
}

BinaryMask mask_from_bbox(const BBox& box, int width, int height) {
    validate_bbox(box);
    if (width <= 0 || height <= 0) throw ShapeError("image dimensions must be positive");

    BinaryMask mask(width, height);
    const int col_begin = clamp_index(first_center_at_or_after(box.x), width);
    const int col_end = clamp_index(end_center_before(box.x + box.w), width);
    const int row_begin = clamp_index(first_center_at_or_after(box.y), height);
    const int row_end = clamp_index(end_center_before(box.y + box.h), height);
    for (int row = row_begin; row < row_end; ++row)
        for (int col = col_begin; col < col_end; ++col) mask.set(row, col, 1);
    return mask;
}

ConfusionCounts pixel_counts(const BinaryMask& pred, const BinaryMask& gt) {
    if (!pred.same_shape(gt))
        throw ShapeError("pixel_counts requires masks of equal dimensions");

    ConfusionCounts counts;
    const auto& a = pred.data();
    const auto& b = gt.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        counts.pred_area += a[i];
        counts.gt_area += b[i];
        counts.intersection += static_cast<std::uint64_t>(a[i] & b[i]);
    }
    counts.union_area = counts.pred_area + counts.gt_area - counts.intersection;
    return counts;
}

} // namespace maskbench::raster
