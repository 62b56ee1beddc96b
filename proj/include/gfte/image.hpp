#pragma once

#include <Eigen/Core>
#include <string>

namespace gfte {

// Grayscale raster, values in [0,1], 0 = ink. Row-major so that pixel (y,x)
// maps onto the flat buffer the same way tensors do.
using Grayscale = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// 8-bit binary PGM (P5). Chosen for bit-exact, dependency-free dataset I/O.
// `comment`, when non-empty, is written as a single `#` header line.
void write_pgm(const std::string& path, const Grayscale& img, const std::string& comment = "");
Grayscale read_pgm(const std::string& path);

}  // namespace gfte
