#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/rng.hpp"
#include "gradfeat/core/tensor.hpp"

namespace gradfeat {

// Images are rank-3 tensors [H x W x C] with values in [0,1]. Patches are
// flattened row-major (y, then x, then channel) into rank-1 tensors.

namespace detail {

inline void check_patch_geometry(const Tensor& image, std::size_t size) {
  if (image.rank() != 3) {
    throw ShapeError("patch source must be [H x W x C], got " +
                     image.shape_string());
  }
  if (size == 0) throw DomainError("patch size must be >= 1");
  if (size > image.dim(0) || size > image.dim(1)) {
    throw DomainError("image " + image.shape_string() +
                      " smaller than patch size " + std::to_string(size));
  }
}

inline Tensor copy_patch(const Tensor& image, std::size_t top,
                         std::size_t left, std::size_t size) {
  const std::size_t c = image.dim(2);
  Tensor out({size * size * c});
  std::size_t k = 0;
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        out[k++] = image(top + y, left + x, ch);
      }
    }
  }
  return out;
}

}  // namespace detail

// `count` patches at uniform-random top-left positions.
inline std::vector<Tensor> extract_patches(const Tensor& image,
                                           std::size_t size,
                                           std::size_t count, SeededRng& rng) {
  detail::check_patch_geometry(image, size);
  if (count == 0) throw DomainError("patch count must be >= 1");
  const std::size_t rows = image.dim(0) - size + 1;
  const std::size_t cols = image.dim(1) - size + 1;
  std::vector<Tensor> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t top = rng.next_below(rows);
    const std::size_t left = rng.next_below(cols);
    out.push_back(detail::copy_patch(image, top, left, size));
  }
  return out;
}

// Deterministic grid of patches, scanned top-to-bottom then left-to-right;
// positions past the border are dropped, not clamped.
inline std::vector<Tensor> tile_patches(const Tensor& image, std::size_t size,
                                        std::size_t stride) {
  detail::check_patch_geometry(image, size);
  if (stride == 0) throw DomainError("patch stride must be >= 1");
  std::vector<Tensor> out;
  for (std::size_t top = 0; top + size <= image.dim(0); top += stride) {
    for (std::size_t left = 0; left + size <= image.dim(1); left += stride) {
      out.push_back(detail::copy_patch(image, top, left, size));
    }
  }
  return out;
}

}  // namespace gradfeat
