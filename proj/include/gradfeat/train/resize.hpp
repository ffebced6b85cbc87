#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/tensor.hpp"

namespace gradfeat {

// Bilinear resize with pixel-center alignment. Same target size returns the
// input unchanged so identity pipelines stay bit-exact.
inline Tensor resize_bilinear(const Tensor& image, std::size_t out_h,
                              std::size_t out_w) {
  if (image.rank() != 3) {
    throw ShapeError("resize expects [H x W x C], got " + image.shape_string());
  }
  if (out_h == 0 || out_w == 0) throw DomainError("resize target must be >= 1");
  const std::size_t h = image.dim(0);
  const std::size_t w = image.dim(1);
  const std::size_t c = image.dim(2);
  if (out_h == h && out_w == w) return image;

  Tensor out({out_h, out_w, c});
  const double sy = static_cast<double>(h) / static_cast<double>(out_h);
  const double sx = static_cast<double>(w) / static_cast<double>(out_w);
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    const double fy = (static_cast<double>(oy) + 0.5) * sy - 0.5;
    const double cy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
    const std::size_t y0 = static_cast<std::size_t>(std::floor(cy));
    const std::size_t y1 = std::min(y0 + 1, h - 1);
    const double wy = cy - static_cast<double>(y0);
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      const double fx = (static_cast<double>(ox) + 0.5) * sx - 0.5;
      const double cx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
      const std::size_t x0 = static_cast<std::size_t>(std::floor(cx));
      const std::size_t x1 = std::min(x0 + 1, w - 1);
      const double wx = cx - static_cast<double>(x0);
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double top = (1.0 - wx) * image(y0, x0, ch) + wx * image(y0, x1, ch);
        const double bot = (1.0 - wx) * image(y1, x0, ch) + wx * image(y1, x1, ch);
        out(oy, ox, ch) = (1.0 - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

// Flattens an image row-major (y, x, channel) for model input.
inline Tensor flatten_image(const Tensor& image) {
  if (image.rank() != 3) {
    throw ShapeError("flatten expects [H x W x C], got " + image.shape_string());
  }
  return Tensor({image.size()}, image.data());
}

}  // namespace gradfeat
