#pragma once

#include <string>
#include <vector>

namespace densctl {

/// Grayscale raster, row-major, row 0 at the top, intensities scaled to [0, 1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> v;

    double at(int row, int col) const { return v[static_cast<std::size_t>(row) * width + col]; }
};

/// Portable graymap, plain (P2) or raw (P5), maxval up to 65535
/// (raw 16-bit samples are big-endian per the format).
GrayImage load_pgm(const std::string& path);

/// Raw float matrix: uint32 rows, uint32 cols (little-endian), then
/// rows*cols float64 values (little-endian, row-major). Values are used
/// as-is except for scaling by the maximum to land in [0, 1].
GrayImage load_matrix_f64(const std::string& path);

}  // namespace densctl
