#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "gradfeat/distort/distort.hpp"
#include "gradfeat/synthetic.hpp"

using namespace gradfeat;

namespace {

double mse(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return acc / static_cast<double>(a.size());
}

double laplacian_energy(const Tensor& img) {
  const std::size_t h = img.dim(0), w = img.dim(1), c = img.dim(2);
  double acc = 0.0;
  for (std::size_t y = 1; y + 1 < h; ++y) {
    for (std::size_t x = 1; x + 1 < w; ++x) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double l = 4.0 * img(y, x, ch) - img(y - 1, x, ch) -
                         img(y + 1, x, ch) - img(y, x - 1, ch) -
                         img(y, x + 1, ch);
        acc += l * l;
      }
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("level zero is a bit-exact identity for every kind", "[distort]") {
  const Tensor img = synthetic_image(24, 24, 3, 42);
  for (DistortionKind k : kAllDistortionKinds) {
    DistortionSpec spec;
    spec.kind = k;
    spec.level = 0;
    spec.seed = 7;
    const Tensor out = apply_distortion(img, spec);
    REQUIRE(out.shape() == img.shape());
    for (std::size_t i = 0; i < img.size(); ++i) {
      REQUIRE(out[i] == img[i]);
    }
  }
}

TEST_CASE("severity dials up the distance from the original", "[distort]") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Tensor img = synthetic_image(32, 32, 3, 300 + s);
    for (DistortionKind k : kAllDistortionKinds) {
      double prev = 0.0;
      for (int level = 1; level <= 5; ++level) {
        DistortionSpec spec;
        spec.kind = k;
        spec.level = level;
        spec.seed = 11;
        const double d = mse(img, apply_distortion(img, spec));
        INFO(distortion_kind_name(k) << " level " << level << " mse " << d);
        REQUIRE(d >= prev);
        REQUIRE(d > 0.0);
        prev = d;
      }
    }
  }
}

TEST_CASE("outputs stay inside the display range", "[distort]") {
  const Tensor img = synthetic_image(20, 28, 3, 55);
  for (DistortionKind k : kAllDistortionKinds) {
    for (int level = 1; level <= 5; ++level) {
      DistortionSpec spec;
      spec.kind = k;
      spec.level = level;
      spec.seed = 3;
      const Tensor out = apply_distortion(img, spec);
      for (std::size_t i = 0; i < out.size(); ++i) {
        REQUIRE(out[i] >= 0.0);
        REQUIRE(out[i] <= 1.0);
      }
    }
  }
}

TEST_CASE("stochastic kinds are reproducible under the same seed", "[distort]") {
  const Tensor img = synthetic_image(24, 24, 3, 66);
  for (DistortionKind k : {DistortionKind::GaussianNoise,
                           DistortionKind::DirtyLens, DistortionKind::Rain}) {
    DistortionSpec spec;
    spec.kind = k;
    spec.level = 3;
    spec.seed = 12;
    const Tensor a = apply_distortion(img, spec);
    const Tensor b = apply_distortion(img, spec);
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
    spec.seed = 13;
    const Tensor c = apply_distortion(img, spec);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += std::abs(a[i] - c[i]);
    REQUIRE(diff > 0.0);
  }
}

TEST_CASE("additive noise has the advertised variance", "[distort]") {
  const Tensor gray = Tensor::full({64, 64, 3}, 0.5);
  DistortionSpec spec;
  spec.kind = DistortionKind::GaussianNoise;
  spec.level = 3;  // sigma 0.1
  spec.seed = 21;
  const Tensor out = apply_distortion(gray, spec);
  double mean = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) mean += out[i] - 0.5;
  mean /= static_cast<double>(out.size());
  double var = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    var += (out[i] - 0.5 - mean) * (out[i] - 0.5 - mean);
  }
  var /= static_cast<double>(out.size() - 1);
  REQUIRE(var == Catch::Approx(0.01).epsilon(0.10));
}

TEST_CASE("smoothing drains high-frequency energy monotonically", "[distort]") {
  const Tensor img = synthetic_image(32, 32, 3, 77);
  double prev = laplacian_energy(img);
  for (int level = 1; level <= 5; ++level) {
    DistortionSpec spec;
    spec.kind = DistortionKind::GaussianBlur;
    spec.level = level;
    const double e = laplacian_energy(apply_distortion(img, spec));
    REQUIRE(e < prev);
    prev = e;
  }
}

TEST_CASE("smoothing preserves constant images", "[distort]") {
  const Tensor flat = Tensor::full({16, 16, 3}, 0.7);
  DistortionSpec spec;
  spec.kind = DistortionKind::GaussianBlur;
  spec.level = 4;
  const Tensor out = apply_distortion(flat, spec);
  for (std::size_t i = 0; i < out.size(); ++i) {
    REQUIRE(out[i] == Catch::Approx(0.7).margin(1e-12));
  }
}

TEST_CASE("full decolorization equalizes the channels", "[distort]") {
  const Tensor img = synthetic_image(16, 16, 3, 88);
  DistortionSpec spec;
  spec.kind = DistortionKind::Decolorize;
  spec.level = 5;
  const Tensor out = apply_distortion(img, spec);
  for (std::size_t y = 0; y < 16; ++y) {
    for (std::size_t x = 0; x < 16; ++x) {
      REQUIRE(out(y, x, 0) == Catch::Approx(out(y, x, 1)).margin(1e-12));
      REQUIRE(out(y, x, 1) == Catch::Approx(out(y, x, 2)).margin(1e-12));
    }
  }
  // Halfway blend sits between the original and the gray version.
  spec.level = 3;
  const Tensor mid = apply_distortion(img, spec);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double lo = std::min(img[i], out[i]) - 1e-12;
    const double hi = std::max(img[i], out[i]) + 1e-12;
    REQUIRE(mid[i] >= lo);
    REQUIRE(mid[i] <= hi);
  }
}

TEST_CASE("block quantization leaves a non-multiple-of-eight border intact", "[distort]") {
  const Tensor img = synthetic_image(19, 21, 3, 99);
  DistortionSpec spec;
  spec.kind = DistortionKind::CodecBlockiness;
  spec.level = 4;
  const Tensor out = apply_distortion(img, spec);
  REQUIRE(out.shape() == img.shape());
  REQUIRE(mse(img, out) > 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    REQUIRE(out[i] >= 0.0);
    REQUIRE(out[i] <= 1.0);
  }
}

TEST_CASE("lens blobs and streaks only brighten or blend, never tear", "[distort]") {
  const Tensor img = synthetic_image(32, 32, 3, 111);
  for (DistortionKind k : {DistortionKind::DirtyLens, DistortionKind::Rain}) {
    DistortionSpec spec;
    spec.kind = k;
    spec.level = 5;
    spec.seed = 5;
    const Tensor out = apply_distortion(img, spec);
    std::size_t touched = 0;
    for (std::size_t i = 0; i < img.size(); ++i) {
      if (out[i] != img[i]) ++touched;
    }
    REQUIRE(touched > 0);
    REQUIRE(touched < img.size());
  }
}

TEST_CASE("kind names and codes round trip", "[distort]") {
  for (DistortionKind k : kAllDistortionKinds) {
    REQUIRE(distortion_kind_from_name(distortion_kind_name(k)) == k);
    REQUIRE(distortion_kind_from_name(distortion_kind_code(k)) == k);
  }
  REQUIRE_THROWS_AS(distortion_kind_from_name("sepia"), DomainError);
}

TEST_CASE("distortion inputs are validated", "[distort]") {
  const Tensor img = synthetic_image(8, 8, 3, 1);
  DistortionSpec spec;
  spec.level = 6;
  REQUIRE_THROWS_AS(apply_distortion(img, spec), DomainError);
  spec.level = -1;
  REQUIRE_THROWS_AS(apply_distortion(img, spec), DomainError);
  spec.level = 1;
  REQUIRE_THROWS_AS(apply_distortion(Tensor({8, 8}), spec), ShapeError);
  Tensor bad = img;
  bad[0] = 1.5;
  REQUIRE_THROWS_AS(apply_distortion(bad, spec), DomainError);
}

TEST_CASE("the input image is never mutated", "[distort]") {
  const Tensor img = synthetic_image(16, 16, 3, 2);
  const Tensor copy = img;
  DistortionSpec spec;
  spec.kind = DistortionKind::Rain;
  spec.level = 5;
  spec.seed = 9;
  (void)apply_distortion(img, spec);
  for (std::size_t i = 0; i < img.size(); ++i) REQUIRE(img[i] == copy[i]);
}
