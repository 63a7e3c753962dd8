#include "maskbench/dataset/pgm.hpp"

#include <fstream>
#include <string>

#include "maskbench/core/error.hpp"

namespace maskbench::dataset {

void write_pgm(const raster::BinaryMask& mask, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "P5\n" << mask.width() << " " << mask.height() << "\n255\n";
    std::string row(static_cast<std::size_t>(mask.width()), '\0');
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            row[static_cast<std::size_t>(c)] = mask.at(r, c) ? static_cast<char>(255) : '\0';
        }
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("failed writing " + path);
}

raster::BinaryMask read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw ParseError(path + ": expected binary PGM (P5), got \"" + magic + "\"");
    int width = 0, height = 0, maxval = 0;
    in >> width >> height >> maxval;
    if (!in || width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
        throw ParseError(path + ": malformed PGM header");
    }
    in.get(); // single whitespace byte after the header
    raster::BinaryMask mask(width, height);
    std::vector<char> row(static_cast<std::size_t>(width));
    for (int r = 0; r < height; ++r) {
        in.read(row.data(), static_cast<std::streamsize>(row.size()));
        if (!in) throw ParseError(path + ": truncated PGM pixel data");
        for (int c = 0; c < width; ++c) {
            mask.set(r, c, row[static_cast<std::size_t>(c)] != 0 ? 1 : 0);
        }
    }
    return mask;
}

} // namespace maskbench::dataset
