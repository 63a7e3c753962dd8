#pragma once

#include <string>

#include "maskbench/raster/types.hpp"

namespace maskbench::dataset {

// Binary PGM (P5), set pixels at 255 on a 0 background.
void write_pgm(const raster::BinaryMask& mask, const std::string& path);

// Reads a binary PGM back into a mask (any value > 0 counts as set).
raster::BinaryMask read_pgm(const std::string& path);

} // namespace maskbench::dataset
