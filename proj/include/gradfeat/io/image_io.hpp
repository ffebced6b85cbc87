#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/io/file_util.hpp"

namespace gradfeat {

// Binary PPM (P6, RGB) and PGM (P5, gray), 8-bit maxval 255 only. Loaded
// pixels are scaled by 1/255 into [0,1]; saving rounds back, so an 8-bit
// round trip is byte-identical.

namespace detail {

struct PnmCursor {
  const std::string& bytes;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at byte offset " + std::to_string(pos));
  }

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
  }

  std::size_t read_number() {
    skip_space_and_comments();
    if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9') {
      fail("expected decimal number");
    }
    std::size_t v = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (v > 1000000) fail("number out of range");
      ++pos;
    }
    return v;
  }
};

}  // namespace detail

inline Tensor decode_image(const std::string& bytes) {
  detail::PnmCursor cur{bytes};
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    cur.fail("not a binary PPM/PGM file (expected P5 or P6 magic)");
  }
  const std::size_t channels = bytes[1] == '6' ? 3 : 1;
  cur.pos = 2;
  const std::size_t width = cur.read_number();
  const std::size_t height = cur.read_number();
  const std::size_t maxval = cur.read_number();
  if (width == 0 || height == 0) cur.fail("zero image dimension");
  if (maxval != 255) cur.fail("unsupported maxval " + std::to_string(maxval));
  if (cur.pos >= bytes.size() ||
      (bytes[cur.pos] != ' ' && bytes[cur.pos] != '\t' &&
       bytes[cur.pos] != '\r' && bytes[cur.pos] != '\n')) {
    cur.fail("expected single whitespace before pixel data");
  }
  ++cur.pos;

  const std::size_t expected = width * height * channels;
  const std::size_t actual = bytes.size() - cur.pos;
  if (actual < expected) {
    throw ParseError("truncated pixel data: expected " +
                     std::to_string(expected) + " bytes, got " +
                     std::to_string(actual) + " at byte offset " +
                     std::to_string(cur.pos));
  }

  Tensor img({height, width, channels});
  for (std::size_t i = 0; i < expected; ++i) {
    img[i] = static_cast<double>(
                 static_cast<unsigned char>(bytes[cur.pos + i])) /
             255.0;
  }
  return img;
}

inline Tensor load_image(const std::string& path) {
  return decode_image(read_file(path));
}

inline std::string encode_image(const Tensor& image) {
  if (image.rank() != 3 || (image.dim(2) != 1 && image.dim(2) != 3)) {
    throw ShapeError("image must be [H x W x 1] or [H x W x 3], got " +
                     image.shape_string());
  }
  const std::size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
  std::string out = c == 3 ? "P6\n" : "P5\n";
  out += std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + h * w * c);
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double v = image[i];
    const long q = std::lround(std::min(std::max(v, 0.0), 1.0) * 255.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
  }
  return out;
}

inline void save_image(const Tensor& image, const std::string& path) {
  write_file_atomic(path, encode_image(image));
}

}  // namespace gradfeat
