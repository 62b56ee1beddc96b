#include "gfte/image.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

#include "gfte/error.hpp"

namespace gfte {

void write_pgm(const std::string& path, const Grayscale& img, const std::string& comment) {
  if (img.rows() < 1 || img.cols() < 1) throw DataError("write_pgm: empty image");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("write_pgm: cannot open " + path);
  f << "P5\n";
  if (!comment.empty()) f << "# " << comment << "\n";
  f << img.cols() << " " << img.rows() << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.cols()));
  for (Eigen::Index y = 0; y < img.rows(); ++y) {
    for (Eigen::Index x = 0; x < img.cols(); ++x) {
      const float v = std::clamp(img(y, x), 0.0f, 1.0f);
      row[static_cast<std::size_t>(x)] = static_cast<std::uint8_t>(v * 255.0f + 0.5f);
    }
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw DataError("write_pgm: write failed for " + path);
}

namespace {

// Reads the next whitespace-delimited token, skipping `#` comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

Grayscale read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("read_pgm: cannot open " + path);
  if (next_token(f) != "P5") throw DataError("read_pgm: " + path + " is not a binary PGM (P5)");
  long w = 0, h = 0, maxval = 0;
  try {
    w = std::stol(next_token(f));
    h = std::stol(next_token(f));
    maxval = std::stol(next_token(f));
  } catch (const std::exception&) {
    throw DataError("read_pgm: malformed header in " + path);
  }
  if (w < 1 || h < 1 || maxval != 255)
    throw DataError("read_pgm: unsupported dimensions or maxval in " + path);
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (f.gcount() != static_cast<std::streamsize>(buf.size()))
    throw DataError("read_pgm: truncated pixel data in " + path);
  Grayscale img(h, w);
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x)
      img(y, x) = static_cast<float>(buf[static_cast<std::size_t>(y) * w + x]) / 255.0f;
  return img;
}

}  // namespace gfte
