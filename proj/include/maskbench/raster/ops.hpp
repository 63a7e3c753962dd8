#pragma once

#include <span>

#include "maskbench/raster/types.hpp"

namespace maskbench::raster {

// Scanline rasterization under the even-odd rule: pixel (row i, col j) is set
// iff its center (j+0.5, i+0.5) lies inside the polygon. Geometry outside the
// image is clipped away.
BinaryMask rasterize_polygon(const Polygon& poly, int width, int height);

// Rasterizes several rings independently and ORs the results (multi-part
// instances).
BinaryMask rasterize_polygons(std::span<const Polygon> polys, int width, int height);

// Morphological dilation with a square structuring element of side 2r+1
// (Chebyshev ball). The image boundary truncates; there is no wraparound.
BinaryMask dilate(const BinaryMask& mask, int radius);

RleMask rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(const RleMask& rle);

// Mask whose set pixels are exactly the centers inside [x, x+w) x [y, y+h),
// clipped to the image.
BinaryMask mask_from_bbox(const BBox& box, int width, int height);

ConfusionCounts pixel_counts(const BinaryMask& pred, const BinaryMask& gt);

} // namespace maskbench::raster
