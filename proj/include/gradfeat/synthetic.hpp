#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/rng.hpp"
#include "gradfeat/core/tensor.hpp"

namespace gradfeat {

// Seeded multi-octave value-noise textures. Pixels are pure functions of
// (seed, coordinates), so any crop or resolution of the same seed agrees.
// Channels mix a shared luminance field with per-channel tints, which keeps
// RGB correlated but chromatic; distortions that collapse color or blur
// texture therefore have something to destroy.

namespace detail {

inline double lattice_value(std::uint64_t seed, std::uint64_t octave,
                            std::uint64_t channel, std::uint64_t yi,
                            std::uint64_t xi) {
  std::uint64_t h = seed;
  h = splitmix64(h ^ (octave + 0x9e3779b97f4a7c15ULL));
  h = splitmix64(h ^ (channel + 0xbf58476d1ce4e5b9ULL));
  h = splitmix64(h ^ (yi * 0x94d049bb133111ebULL + xi));
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

inline double value_noise(std::uint64_t seed, std::uint64_t octave,
                          std::uint64_t channel, double y, double x) {
  const double fy = std::floor(y);
  const double fx = std::floor(x);
  const auto yi = static_cast<std::uint64_t>(static_cast<std::int64_t>(fy));
  const auto xi = static_cast<std::uint64_t>(static_cast<std::int64_t>(fx));
  const double ty = smoothstep(y - fy);
  const double tx = smoothstep(x - fx);
  const double v00 = lattice_value(seed, octave, channel, yi, xi);
  const double v01 = lattice_value(seed, octave, channel, yi, xi + 1);
  const double v10 = lattice_value(seed, octave, channel, yi + 1, xi);
  const double v11 = lattice_value(seed, octave, channel, yi + 1, xi + 1);
  const double top = v00 + (v01 - v00) * tx;
  const double bot = v10 + (v11 - v10) * tx;
  return top + (bot - top) * ty;
}

inline double octave_field(std::uint64_t seed, std::uint64_t channel, double y,
                           double x, double base_cells) {
  double acc = 0.0;
  double amp = 1.0;
  double total = 0.0;
  double freq = base_cells;
  for (std::uint64_t oct = 0; oct < 3; ++oct) {
    acc += amp * value_noise(seed, oct, channel, y * freq, x * freq);
    total += amp;
    amp *= 0.5;
    freq *= 2.0;
  }
  return acc / total;
}

}  // namespace detail

inline Tensor synthetic_image(std::size_t h, std::size_t w, std::size_t c,
                              std::uint64_t seed) {
  if (h == 0 || w == 0 || c == 0) {
    throw DomainError("synthetic image dimensions must be >= 1");
  }
  Tensor img({h, w, c});
  const double span = static_cast<double>(std::min(h, w));
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double ny = static_cast<double>(y) / span;
      const double nx = static_cast<double>(x) / span;
      const double shared = detail::octave_field(seed, 1000, ny, nx, 4.0);
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double tint = detail::octave_field(seed, ch, ny, nx, 3.0);
        const double v = 0.6 * shared + 0.4 * tint;
        img(y, x, ch) = std::clamp(0.05 + 0.9 * v, 0.0, 1.0);
      }
    }
  }
  return img;
}

inline std::vector<Tensor> synthetic_image_set(std::size_t count,
                                               std::size_t h, std::size_t w,
                                               std::size_t c,
                                               std::uint64_t seed) {
  std::vector<Tensor> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(synthetic_image(h, w, c, SeededRng::derive(seed, i)));
  }
  return out;
}

// Flat-background icon: one solid shape (disc, square, or diamond) with an
// antialiased one-pixel edge. Unlike the textures above, these images live on
// a low-dimensional manifold (shape class, centre, size, two colours), so a
// small latent model can represent them well instead of treating every pixel
// as irreducible noise.
inline Tensor synthetic_shape_image(std::size_t h, std::size_t w,
                                    std::size_t c, std::uint64_t seed) {
  if (h == 0 || w == 0 || c == 0) {
    throw DomainError("synthetic image dimensions must be >= 1");
  }
  SeededRng rng(seed);
  const std::uint64_t shape = rng.next_below(3);
  const double cx = rng.next_uniform(0.32, 0.68) * static_cast<double>(w);
  const double cy = rng.next_uniform(0.32, 0.68) * static_cast<double>(h);
  const double radius =
      rng.next_uniform(0.18, 0.34) * static_cast<double>(std::min(h, w));
  std::vector<double> bg(c);
  std::vector<double> fg(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    bg[ch] = rng.next_uniform(0.15, 0.85);
    const double dir = rng.next_uniform() < 0.5 ? -1.0 : 1.0;
    fg[ch] = std::clamp(bg[ch] + dir * rng.next_uniform(0.3, 0.6), 0.02, 0.98);
  }
  Tensor img({h, w, c});
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      double dist = 0.0;
      if (shape == 0) {
        dist = std::sqrt(dx * dx + dy * dy);
      } else if (shape == 1) {
        dist = std::max(std::abs(dx), std::abs(dy));
      } else {
        dist = 0.7071 * (std::abs(dx) + std::abs(dy));
      }
      const double cover = std::clamp(radius - dist + 0.5, 0.0, 1.0);
      for (std::size_t ch = 0; ch < c; ++ch) {
        img(y, x, ch) = bg[ch] + (fg[ch] - bg[ch]) * cover;
      }
    }
  }
  return img;
}

inline std::vector<Tensor> synthetic_shape_image_set(std::size_t count,
                                                     std::size_t h,
                                                     std::size_t w,
                                                     std::size_t c,
                                                     std::uint64_t seed) {
  std::vector<Tensor> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(synthetic_shape_image(h, w, c, SeededRng::derive(seed, i)));
  }
  return out;
}

}  // namespace gradfeat
