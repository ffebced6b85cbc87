#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "gradfeat/core/rng.hpp"
#include "gradfeat/models/params.hpp"
#include "gradfeat/train/optimizer.hpp"
#include "gradfeat/train/patches.hpp"
#include "gradfeat/train/resize.hpp"
#include "gradfeat/train/trainer.hpp"
#include "gradfeat/train/zca.hpp"
#include "gradfeat/synthetic.hpp"

using namespace gradfeat;

TEST_CASE("momentum descent solves a quadratic bowl", "[training]") {
  Tensor w = Tensor::from_vector({4.0, -3.0, 2.5});
  const Tensor target = Tensor::from_vector({1.0, 2.0, -0.5});
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::SgdMomentum;
  cfg.learning_rate = 0.2;
  cfg.momentum = 0.9;
  Optimizer opt(cfg, {{"w", &w}});
  for (int i = 0; i < 500; ++i) {
    Tensor g = sub(w, target);
    opt.step({g});
  }
  REQUIRE(opt.steps_taken() == 500);
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(w[i] == Catch::Approx(target[i]).margin(1e-6));
  }
}

TEST_CASE("adaptive descent solves the same bowl", "[training]") {
  Tensor w = Tensor::from_vector({4.0, -3.0, 2.5});
  const Tensor target = Tensor::from_vector({1.0, 2.0, -0.5});
  OptimizerConfig cfg;
  cfg.learning_rate = 0.05;
  Optimizer opt(cfg, {{"w", &w}});
  for (int i = 0; i < 3000; ++i) {
    Tensor g = sub(w, target);
    opt.step({g});
  }
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(w[i] == Catch::Approx(target[i]).margin(1e-4));
  }
}

TEST_CASE("zero learning rate leaves parameters bit-identical", "[training]") {
  SaeConfig scfg;
  scfg.input_dim = 8;
  scfg.latent_dim = 4;
  SaeModel m = SaeModel::init_random(scfg, 17);
  const std::uint64_t before = model_checksum(m);

  OptimizerConfig cfg;
  cfg.learning_rate = 0.0;
  Optimizer opt(cfg, m.params());
  SeededRng rng(18);
  Tensor x = sample_gaussian(rng, {8});
  for (int i = 0; i < 5; ++i) {
    const TotalBackprop tb = backprop_total(m, x);
    std::vector<Tensor> grads = tb.grads.encoder;
    grads.insert(grads.end(), tb.grads.decoder.begin(), tb.grads.decoder.end());
    opt.step(grads);
  }
  REQUIRE(opt.steps_taken() == 5);
  REQUIRE(model_checksum(m) == before);
}

TEST_CASE("zero gradients leave parameters bit-identical", "[training]") {
  Tensor w = Tensor::from_vector({1.0, -2.0});
  OptimizerConfig cfg;
  Optimizer opt(cfg, {{"w", &w}});
  opt.step({Tensor({2})});
  REQUIRE(w[0] == 1.0);
  REQUIRE(w[1] == -2.0);
}

TEST_CASE("optimizer validates configuration and gradient shapes", "[training]") {
  OptimizerConfig bad;
  bad.learning_rate = -1.0;
  REQUIRE_THROWS_AS(bad.validate(), DomainError);
  bad.learning_rate = 0.1;
  bad.batch_size = 0;
  REQUIRE_THROWS_AS(bad.validate(), DomainError);

  Tensor w({3});
  OptimizerConfig cfg;
  Optimizer opt(cfg, {{"w", &w}});
  REQUIRE_THROWS_AS(opt.step({}), ShapeError);
  REQUIRE_THROWS_AS(opt.step({Tensor({2})}), ShapeError);
}

namespace {

std::vector<Tensor> toy_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<Tensor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(sample_gaussian(rng, {d}));
  }
  return out;
}

}  // namespace

TEST_CASE("training loss falls and the report is reproducible", "[training]") {
  SaeConfig scfg;
  scfg.input_dim = 12;
  scfg.latent_dim = 6;
  scfg.beta = 0.5;
  const std::vector<Tensor> data = toy_dataset(64, 12, 400);

  OptimizerConfig ocfg;
  ocfg.learning_rate = 3e-3;
  ocfg.epochs = 30;
  ocfg.batch_size = 16;
  ocfg.seed = 9;

  SaeModel m1 = SaeModel::init_random(scfg, 123);
  const TrainReport r1 = train(m1, data, ocfg);
  REQUIRE(r1.epoch_loss.size() == 30);
  REQUIRE(r1.epoch_loss.back().total < r1.epoch_loss.front().total);
  REQUIRE(r1.final_checksum == model_checksum(m1));

  SaeModel m2 = SaeModel::init_random(scfg, 123);
  const TrainReport r2 = train(m2, data, ocfg);
  REQUIRE(r2.final_checksum == r1.final_checksum);
  for (std::size_t e = 0; e < r1.epoch_loss.size(); ++e) {
    REQUIRE(r1.epoch_loss[e].total == r2.epoch_loss[e].total);
    REQUIRE(r1.epoch_loss[e].recon == r2.epoch_loss[e].recon);
    REQUIRE(r1.epoch_loss[e].reg == r2.epoch_loss[e].reg);
  }
}

TEST_CASE("vae training runs deterministically", "[training]") {
  VaeConfig vcfg;
  vcfg.input_dim = 10;
  vcfg.hidden_dim = 8;
  vcfg.latent_dim = 3;
  SeededRng rng(77);
  std::vector<Tensor> data;
  for (int i = 0; i < 24; ++i) data.push_back(sample_uniform(rng, {10}, 0.0, 1.0));

  OptimizerConfig ocfg;
  ocfg.learning_rate = 1e-3;
  ocfg.epochs = 8;
  ocfg.batch_size = 8;
  ocfg.seed = 5;

  VaeModel v1 = VaeModel::init_random(vcfg, 900);
  const TrainReport r1 = train(v1, data, ocfg);
  VaeModel v2 = VaeModel::init_random(vcfg, 900);
  const TrainReport r2 = train(v2, data, ocfg);
  REQUIRE(r1.epoch_loss.size() == 8);
  REQUIRE(r1.final_checksum == r2.final_checksum);
  for (std::size_t e = 0; e < 8; ++e) {
    REQUIRE(r1.epoch_loss[e].total == r2.epoch_loss[e].total);
  }
}

TEST_CASE("divergence raises an error naming the epoch", "[training]") {
  SaeConfig scfg;
  scfg.input_dim = 6;
  scfg.latent_dim = 4;
  SaeModel m = SaeModel::init_random(scfg, 2);
  const std::vector<Tensor> data = toy_dataset(8, 6, 3);
  OptimizerConfig ocfg;
  ocfg.kind = OptimizerKind::SgdMomentum;
  ocfg.learning_rate = 1e12;
  ocfg.momentum = 0.0;
  ocfg.epochs = 50;
  ocfg.batch_size = 8;
  REQUIRE_THROWS_WITH(train(m, data, ocfg),
                      Catch::Matchers::ContainsSubstring("diverged at epoch"));
}

TEST_CASE("training rejects an empty dataset", "[training]") {
  SaeConfig scfg;
  scfg.input_dim = 4;
  scfg.latent_dim = 2;
  SaeModel m = SaeModel::init_random(scfg, 1);
  OptimizerConfig ocfg;
  REQUIRE_THROWS_AS(train(m, {}, ocfg), DomainError);
}

TEST_CASE("random patches stay inside the image and honor the seed", "[training]") {
  const Tensor img = synthetic_image(24, 32, 3, 5);
  SeededRng r1(8);
  SeededRng r2(8);
  const std::vector<Tensor> a = extract_patches(img, 8, 40, r1);
  const std::vector<Tensor> b = extract_patches(img, 8, 40, r2);
  REQUIRE(a.size() == 40);
  for (std::size_t p = 0; p < a.size(); ++p) {
    REQUIRE(a[p].size() == 8 * 8 * 3);
    for (std::size_t i = 0; i < a[p].size(); ++i) {
      REQUIRE(a[p][i] == b[p][i]);
      REQUIRE(a[p][i] >= 0.0);
      REQUIRE(a[p][i] <= 1.0);
    }
  }
}

TEST_CASE("a full-image patch is the image itself", "[training]") {
  const Tensor img = synthetic_image(8, 8, 1, 6);
  SeededRng rng(7);
  const std::vector<Tensor> ps = extract_patches(img, 8, 3, rng);
  for (const Tensor& p : ps) {
    for (std::size_t i = 0; i < p.size(); ++i) REQUIRE(p[i] == img[i]);
  }
}

TEST_CASE("patch extraction validates geometry", "[training]") {
  const Tensor img = synthetic_image(8, 8, 3, 1);
  SeededRng rng(2);
  REQUIRE_THROWS_AS(extract_patches(img, 0, 1, rng), DomainError);
  REQUIRE_THROWS_AS(extract_patches(img, 9, 1, rng), DomainError);
  REQUIRE_THROWS_AS(extract_patches(Tensor({4, 4}), 2, 1, rng), ShapeError);
}

TEST_CASE("tiling covers the grid without overlap", "[training]") {
  const Tensor img = synthetic_image(16, 16, 3, 9);
  const std::vector<Tensor> tiles = tile_patches(img, 8, 8);
  REQUIRE(tiles.size() == 4);
  const std::vector<Tensor> dense = tile_patches(img, 8, 4);
  REQUIRE(dense.size() == 9);
  const std::vector<Tensor> odd = tile_patches(synthetic_image(17, 15, 1, 3), 8, 8);
  REQUIRE(odd.size() == 2);
}

TEST_CASE("whitening a spherical cloud is near isotropic scaling", "[zca]") {
  SeededRng rng(42);
  std::vector<Tensor> data;
  const std::size_t d = 8;
  for (int i = 0; i < 10000; ++i) data.push_back(sample_gaussian(rng, {d}));
  const ZcaTransform t = fit_zca(data, 0.1);
  const double expected = 1.0 / std::sqrt(1.0 + 0.1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double want = (i == j) ? expected : 0.0;
      REQUIRE(t.whitening_matrix(i, j) == Catch::Approx(want).margin(0.05));
    }
  }
}

TEST_CASE("whitened correlated data has near-diagonal covariance", "[zca]") {
  SeededRng rng(43);
  const std::size_t d = 6;
  Tensor mix = sample_gaussian(rng, {d, d});
  for (std::size_t i = 0; i < d; ++i) mix(i, i) += 2.0;
  std::vector<Tensor> data;
  for (int i = 0; i < 8000; ++i) {
    data.push_back(matvec(mix, sample_gaussian(rng, {d})));
  }
  // Small shrinkage: the residual eigenvalue ratio s/(s+eps) stays near one,
  // so departures from the identity reflect estimation error, not the fit.
  const ZcaTransform t = fit_zca(data, 0.01);
  std::vector<Tensor> white;
  white.reserve(data.size());
  for (const Tensor& x : data) white.push_back(apply_zca(t, x));

  Tensor mean({d});
  for (const Tensor& w : white) axpy(mean, 1.0 / white.size(), w);
  Tensor cov({d, d});
  for (const Tensor& w : white) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        cov(i, j) += (w[i] - mean[i]) * (w[j] - mean[j]) / (white.size() - 1.0);
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) {
        REQUIRE(cov(i, j) > 0.5);
        REQUIRE(cov(i, j) < 1.05);
      } else {
        REQUIRE(std::abs(cov(i, j)) < 0.05);
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      REQUIRE(t.whitening_matrix(i, j) ==
              Catch::Approx(t.whitening_matrix(j, i)).margin(1e-10));
    }
  }
}

TEST_CASE("the mean patch whitens to the zero vector", "[zca]") {
  SeededRng rng(44);
  std::vector<Tensor> data;
  for (int i = 0; i < 40; ++i) data.push_back(sample_gaussian(rng, {5}));
  const ZcaTransform t = fit_zca(data, 0.1);
  const Tensor z = apply_zca(t, t.mean);
  for (std::size_t i = 0; i < z.size(); ++i) REQUIRE(z[i] == 0.0);
}

TEST_CASE("whitening fit validates its inputs", "[zca]") {
  SeededRng rng(45);
  std::vector<Tensor> data;
  for (int i = 0; i < 4; ++i) data.push_back(sample_gaussian(rng, {5}));
  REQUIRE_THROWS_AS(fit_zca(data, 0.1), DomainError);
  REQUIRE_THROWS_AS(fit_zca({}, 0.1), DomainError);
  for (int i = 0; i < 10; ++i) data.push_back(sample_gaussian(rng, {5}));
  REQUIRE_THROWS_AS(fit_zca(data, 0.0), DomainError);
  data.push_back(sample_gaussian(rng, {4}));
  REQUIRE_THROWS_AS(fit_zca(data, 0.1), ShapeError);

  const ZcaTransform t = fit_zca(toy_dataset(12, 5, 46), 0.1);
  REQUIRE_THROWS_AS(apply_zca(t, Tensor({4})), ShapeError);
}

TEST_CASE("resize to the same geometry is exact", "[training]") {
  const Tensor img = synthetic_image(13, 9, 3, 77);
  const Tensor out = resize_bilinear(img, 13, 9);
  REQUIRE(out.shape() == img.shape());
  for (std::size_t i = 0; i < img.size(); ++i) REQUIRE(out[i] == img[i]);
}

TEST_CASE("resize preserves constants and interpolates in range", "[training]") {
  Tensor flat = Tensor::full({6, 6, 3}, 0.25);
  const Tensor up = resize_bilinear(flat, 11, 17);
  REQUIRE(up.dim(0) == 11);
  REQUIRE(up.dim(1) == 17);
  for (std::size_t i = 0; i < up.size(); ++i) {
    REQUIRE(up[i] == Catch::Approx(0.25).margin(1e-12));
  }
  const Tensor img = synthetic_image(32, 32, 3, 4);
  const Tensor down = resize_bilinear(img, 16, 16);
  for (std::size_t i = 0; i < down.size(); ++i) {
    REQUIRE(down[i] >= 0.0);
    REQUIRE(down[i] <= 1.0);
  }
  REQUIRE(flatten_image(down).size() == 16 * 16 * 3);
  REQUIRE_THROWS_AS(resize_bilinear(img, 0, 4), DomainError);
  REQUIRE_THROWS_AS(resize_bilinear(Tensor({4, 4}), 2, 2), ShapeError);
}
