#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "maskbench/core/rng.hpp"
#include "maskbench/raster/ops.hpp"

using namespace maskbench;
using raster::BBox;
using raster::BinaryMask;
using raster::Polygon;
using raster::RleMask;

namespace {

// Reference point-in-polygon: ray-crossing parity test evaluated directly at
// every pixel center. Deliberately has nothing in common with the scanline
// implementation under test.
bool point_in_polygon(const Polygon& poly, double px, double py) {
    bool inside = false;
    std::size_t n = poly.vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        double xi = poly.vertices[i].x, yi = poly.vertices[i].y;
        double xj = poly.vertices[j].x, yj = poly.vertices[j].y;
        bool crosses = (yi > py) != (yj > py);
        if (crosses && px < (xj - xi) * (py - yi) / (yj - yi) + xi) {
            inside = !inside;
        }
    }
    return inside;
}

BinaryMask rasterize_reference(const Polygon& poly, int width, int height) {
    BinaryMask mask(width, height);
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            if (point_in_polygon(poly, col + 0.5, row + 0.5)) mask.set(row, col, 1);
        }
    }
    return mask;
}

BinaryMask dilate_reference(const BinaryMask& mask, int radius) {
    BinaryMask out(mask.width(), mask.height());
    for (int row = 0; row < mask.height(); ++row) {
        for (int col = 0; col < mask.width(); ++col) {
            bool hit = false;
            for (int dr = -radius; dr <= radius && !hit; ++dr) {
                for (int dc = -radius; dc <= radius && !hit; ++dc) {
                    int r = row + dr, c = col + dc;
                    if (r >= 0 && r < mask.height() && c >= 0 && c < mask.width() &&
                        mask.at(r, c)) {
                        hit = true;
                    }
                }
            }
            if (hit) out.set(row, col, 1);
        }
    }
    return out;
}

BinaryMask random_mask(std::mt19937_64& rng, int width, int height, double density) {
    BinaryMask mask(width, height);
    for (auto& px : mask.data()) {
        px = rand_unit(rng) < density ? 1 : 0;
    }
    return mask;
}

Polygon random_convexish_polygon(std::mt19937_64& rng, int width, int height) {
    // A star-shaped polygon around a random center: radial vertices sorted by
    // angle can self-touch but never self-cross, and may spill past the image
    // on the high side (coordinates stay non-negative by contract).
    double cx = 4.0 + rand_unit(rng) * (width - 8);
    double cy = 4.0 + rand_unit(rng) * (height - 8);
    int n = static_cast<int>(rand_int(rng, 3, 9));
    Polygon poly;
    for (int i = 0; i < n; ++i) {
        double angle = (i + rand_unit(rng) * 0.8) * 2.0 * 3.14159265358979323846 / n;
        double radius = 2.0 + rand_unit(rng) * (width / 3.0);
        poly.vertices.push_back({std::max(0.0, cx + radius * std::cos(angle)),
                                 std::max(0.0, cy + radius * std::sin(angle))});
    }
    return poly;
}

} // namespace

TEST_CASE("axis-aligned integer rectangle rasterizes to exactly w*h pixels") {
    Polygon rect{{{3, 2}, {11, 2}, {11, 6}, {3, 6}}};
    BinaryMask mask = raster::rasterize_polygon(rect, 16, 16);
    CHECK(mask.area() == 8 * 4);
    for (int row = 0; row < 16; ++row) {
        for (int col = 0; col < 16; ++col) {
            bool expected = col >= 3 && col < 11 && row >= 2 && row < 6;
            CHECK(mask.at(row, col) == (expected ? 1 : 0));
        }
    }
}

TEST_CASE("rasterization matches per-pixel parity oracle on hand-picked shapes") {
    std::vector<Polygon> shapes = {
        {{{1, 1}, {14, 2}, {7, 13}}},                                  // triangle
        {{{2, 2}, {13, 2}, {13, 13}, {8, 13}, {8, 7}, {2, 7}}},        // L-shape
        {{{8, 1}, {15, 8}, {8, 15}, {1, 8}}},                          // diamond
        {{{0.5, 0.5}, {15.5, 0.5}, {15.5, 15.5}, {0.5, 15.5}}},        // centers on edge
        {{{10, 10}, {30, 10}, {30, 30}, {10, 30}}},                    // spills past image
        {{{4, 4}, {12, 4}, {4, 12}, {12, 12}}},                        // self-crossing bowtie
    };
    for (const Polygon& poly : shapes) {
        BinaryMask fast = raster::rasterize_polygon(poly, 16, 16);
        BinaryMask slow = rasterize_reference(poly, 16, 16);
        CHECK(fast == slow);
    }
}

TEST_CASE("rasterization matches per-pixel parity oracle on random polygons") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        Polygon poly = random_convexish_polygon(rng, 32, 32);
        BinaryMask fast = raster::rasterize_polygon(poly, 32, 32);
        BinaryMask slow = rasterize_reference(poly, 32, 32);
        REQUIRE(fast == slow);
    }
}

TEST_CASE("multi-ring rasterization ORs the parts") {
    Polygon left{{{1, 1}, {4, 1}, {4, 4}, {1, 4}}};
    Polygon right{{{6, 6}, {9, 6}, {9, 9}, {6, 9}}};
    std::vector<Polygon> rings = {left, right};
    BinaryMask both = raster::rasterize_polygons(rings, 12, 12);
    CHECK(both.area() == 9 + 9);
    CHECK(both.at(2, 2) == 1);
    CHECK(both.at(7, 7) == 1);
    CHECK(both.at(5, 5) == 0);
}

TEST_CASE("degenerate polygons are rejected") {
    CHECK_THROWS_AS(raster::rasterize_polygon(Polygon{{{1, 1}, {2, 2}}}, 8, 8),
                    DegeneratePolygonError);
    CHECK_THROWS_AS(raster::rasterize_polygon(Polygon{}, 8, 8), DegeneratePolygonError);
    CHECK_THROWS_AS(raster::rasterize_polygon(Polygon{{{-1, 2}, {5, 2}, {5, 5}}}, 8, 8),
                    DegeneratePolygonError);
}

TEST_CASE("dilation matches brute-force Chebyshev neighborhood") {
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 60; ++trial) {
        BinaryMask mask = random_mask(rng, 24, 17, 0.1 + 0.08 * (trial % 10));
        for (int radius : {0, 1, 2, 3, 5}) {
            BinaryMask fast = raster::dilate(mask, radius);
            BinaryMask slow = dilate_reference(mask, radius);
            REQUIRE(fast == slow);
        }
    }
}

TEST_CASE("dilation of a single pixel is a clipped square") {
    BinaryMask mask(9, 9);
    mask.set(0, 0, 1);
    BinaryMask out = raster::dilate(mask, 2);
    CHECK(out.area() == 9); // 3x3 corner of the 5x5 square survives clipping
    CHECK(out.at(2, 2) == 1);
    CHECK(out.at(3, 0) == 0);
}

TEST_CASE("dilation by zero is the identity") {
    std::mt19937_64 rng(203);
    BinaryMask mask = random_mask(rng, 15, 11, 0.3);
    CHECK(raster::dilate(mask, 0) == mask);
}

TEST_CASE("negative dilation radius is rejected") {
    BinaryMask mask(4, 4);
    CHECK_THROWS_AS(raster::dilate(mask, -1), ShapeError);
}

TEST_CASE("RLE encoding is column-major starting with the zero run") {
    // 3x3, single set pixel at row 1, col 0: column-major traversal sees
    // one zero, the pixel, then seven zeros.
    BinaryMask mask(3, 3);
    mask.set(1, 0, 1);
    RleMask rle = raster::rle_encode(mask);
    CHECK(rle.counts == std::vector<std::uint64_t>{1, 1, 7});

    // All-ones mask: empty leading zero run.
    BinaryMask ones(2, 2);
    for (auto& px : ones.data()) px = 1;
    CHECK(raster::rle_encode(ones).counts == std::vector<std::uint64_t>{0, 4});

    // All-zeros mask: one run covering everything.
    BinaryMask zeros(2, 2);
    CHECK(raster::rle_encode(zeros).counts == std::vector<std::uint64_t>{4});
}

TEST_CASE("RLE round-trip is the identity on random masks") {
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 300; ++trial) {
        int w = static_cast<int>(rand_int(rng, 1, 40));
        int h = static_cast<int>(rand_int(rng, 1, 40));
        BinaryMask mask = random_mask(rng, w, h, rand_unit(rng));
        RleMask rle = raster::rle_encode(mask);
        CHECK(raster::rle_decode(rle) == mask);
    }
}

TEST_CASE("malformed RLE is rejected with the counts mismatch spelled out") {
    RleMask bad;
    bad.width = 3;
    bad.height = 3;
    bad.counts = {4, 4}; // sums to 8, mask has 9 pixels
    CHECK_THROWS_AS(raster::rle_decode(bad), MalformedRleError);
    CHECK_THROWS_WITH_AS(raster::rle_decode(bad),
                         doctest::Contains("sum to 8"), MalformedRleError);

    RleMask negative;
    negative.width = 0;
    negative.height = 3;
    negative.counts = {0};
    CHECK_THROWS_AS(raster::rle_decode(negative), MalformedRleError);
}

TEST_CASE("mask_from_bbox fills centers inside the half-open box") {
    BinaryMask mask = raster::mask_from_bbox(BBox{2, 1, 3, 2}, 8, 8);
    CHECK(mask.area() == 6);
    CHECK(mask.at(1, 2) == 1);
    CHECK(mask.at(2, 4) == 1);
    CHECK(mask.at(1, 5) == 0);
    CHECK(mask.at(3, 2) == 0);

    // Fractional boxes cover the centers they contain.
    BinaryMask frac = raster::mask_from_bbox(BBox{0.4, 0.4, 0.8, 0.8}, 4, 4);
    CHECK(frac.area() == 1);
    CHECK(frac.at(0, 0) == 1);

    // Boxes are clipped at the image edge.
    BinaryMask clipped = raster::mask_from_bbox(BBox{6, 6, 5, 5}, 8, 8);
    CHECK(clipped.area() == 4);
}

TEST_CASE("pixel_counts tallies the confusion quadrants") {
    BinaryMask pred(4, 1);
    BinaryMask gt(4, 1);
    pred.set(0, 0, 1);
    pred.set(0, 1, 1);
    gt.set(0, 1, 1);
    gt.set(0, 2, 1);
    raster::ConfusionCounts counts = raster::pixel_counts(pred, gt);
    CHECK(counts.intersection == 1);
    CHECK(counts.pred_area == 2);
    CHECK(counts.gt_area == 2);
    CHECK(counts.union_area == 3);

    BinaryMask other(5, 1);
    CHECK_THROWS_AS(raster::pixel_counts(pred, other), ShapeError);
}

TEST_CASE("bbox validation rejects non-finite and empty boxes") {
    CHECK_THROWS_AS(raster::validate_bbox(BBox{0, 0, -1, 2}), ShapeError);
    CHECK_THROWS_AS(raster::validate_bbox(BBox{std::nan(""), 0, 1, 1}), ShapeError);
    CHECK_THROWS_AS(raster::validate_bbox(BBox{0, 0, 0, 1}), ShapeError);
    CHECK_NOTHROW(raster::validate_bbox(BBox{0, 0, 0.5, 0.5}));
}
