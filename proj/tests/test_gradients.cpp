#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "gradfeat/core/rng.hpp"
#include "gradfeat/grad/backprop.hpp"
#include "gradfeat/grad/bundle.hpp"
#include "gradfeat/grad/finite_diff.hpp"
#include "gradfeat/models/sae.hpp"
#include "gradfeat/models/vae.hpp"

using namespace gradfeat;

namespace {

SaeModel small_sae(std::uint64_t seed, double beta = 3.0, double lambda = 3e-3) {
  SaeConfig cfg;
  cfg.input_dim = 7;
  cfg.latent_dim = 5;
  cfg.beta = beta;
  cfg.lambda = lambda;
  return SaeModel::init_random(cfg, seed);
}

VaeModel small_vae(std::uint64_t seed) {
  VaeConfig cfg;
  cfg.input_dim = 6;
  cfg.hidden_dim = 5;
  cfg.latent_dim = 3;
  return VaeModel::init_random(cfg, seed);
}

}  // namespace

TEST_CASE("bundle blocks mirror the parameter lists", "[gradients]") {
  SaeModel m = small_sae(3);
  SeededRng rng(4);
  Tensor x = sample_gaussian(rng, {7});
  const SplitBackprop sb = backprop_split(m, x);
  REQUIRE(sb.bundle.family == ModelFamily::Sae);
  REQUIRE(sb.bundle.recon_encoder.size() == 2);
  REQUIRE(sb.bundle.recon_decoder.size() == 2);
  REQUIRE(sb.bundle.recon_encoder[0].shape() == m.enc_weight.shape());
  REQUIRE(sb.bundle.recon_encoder[1].shape() == m.enc_bias.shape());
  REQUIRE(sb.bundle.reg_decoder[0].shape() == m.dec_weight.shape());
  REQUIRE(sb.loss.total == sb.loss.recon + sb.loss.reg);

  VaeModel v = small_vae(5);
  SeededRng vr(6);
  Tensor vx = sample_uniform(vr, {6}, 0.0, 1.0);
  Tensor eps = sample_gaussian(vr, {3});
  const SplitBackprop vb = backprop_split_with_eps(v, vx, eps);
  REQUIRE(vb.bundle.family == ModelFamily::Vae);
  REQUIRE(vb.bundle.recon_encoder.size() == 6);
  REQUIRE(vb.bundle.recon_decoder.size() == 2);
  REQUIRE(vb.bundle.reg_encoder[2].shape() == v.mu_weight.shape());
}

TEST_CASE("sae decoder regularizer gradient is exactly the decay term", "[gradients]") {
  SaeModel m = small_sae(11);
  SeededRng rng(12);
  Tensor x = sample_gaussian(rng, {7});
  const SplitBackprop sb = backprop_split(m, x);
  const double lambda = m.config.lambda;
  for (std::size_t i = 0; i < m.dec_weight.size(); ++i) {
    REQUIRE(sb.bundle.reg_decoder[0][i] ==
            Catch::Approx(2.0 * lambda * m.dec_weight[i]).margin(1e-12));
  }
  for (std::size_t i = 0; i < m.dec_bias.size(); ++i) {
    REQUIRE(sb.bundle.reg_decoder[1][i] ==
            Catch::Approx(2.0 * lambda * m.dec_bias[i]).margin(1e-12));
  }
}

TEST_CASE("vae decoder regularizer gradient is identically zero", "[gradients]") {
  VaeModel v = small_vae(13);
  SeededRng rng(14);
  Tensor x = sample_uniform(rng, {6}, 0.0, 1.0);
  Tensor eps = sample_gaussian(rng, {3});
  const SplitBackprop sb = backprop_split_with_eps(v, x, eps);
  for (const Tensor& t : sb.bundle.reg_decoder) {
    for (std::size_t i = 0; i < t.size(); ++i) REQUIRE(t[i] == 0.0);
  }
}

TEST_CASE("summed split gradients match the fused pass", "[gradients]") {
  SaeModel m = small_sae(21);
  SeededRng rng(22);
  Tensor x = sample_gaussian(rng, {7});
  const SplitBackprop sb = backprop_split(m, x);
  const TotalBackprop tb = backprop_total(m, x);
  const ParamGradients summed = grad_total(sb.bundle);
  REQUIRE(summed.encoder.size() == tb.grads.encoder.size());
  for (std::size_t p = 0; p < summed.encoder.size(); ++p) {
    for (std::size_t i = 0; i < summed.encoder[p].size(); ++i) {
      REQUIRE(summed.encoder[p][i] ==
              Catch::Approx(tb.grads.encoder[p][i]).margin(1e-12));
    }
  }
  for (std::size_t p = 0; p < summed.decoder.size(); ++p) {
    for (std::size_t i = 0; i < summed.decoder[p].size(); ++i) {
      REQUIRE(summed.decoder[p][i] ==
              Catch::Approx(tb.grads.decoder[p][i]).margin(1e-12));
    }
  }

  VaeModel v = small_vae(23);
  SeededRng vr(24);
  Tensor vx = sample_uniform(vr, {6}, 0.0, 1.0);
  Tensor eps = sample_gaussian(vr, {3});
  const SplitBackprop vs = backprop_split_with_eps(v, vx, eps);
  const TotalBackprop vt = backprop_total_with_eps(v, vx, eps);
  const ParamGradients vsum = grad_total(vs.bundle);
  for (std::size_t p = 0; p < vsum.encoder.size(); ++p) {
    for (std::size_t i = 0; i < vsum.encoder[p].size(); ++i) {
      REQUIRE(vsum.encoder[p][i] ==
              Catch::Approx(vt.grads.encoder[p][i]).margin(1e-12));
    }
  }
}

TEST_CASE("sae gradients pass a central-difference check per term", "[gradients]") {
  SaeModel m = small_sae(31);
  SeededRng rng(32);
  Tensor x = sample_gaussian(rng, {7});
  for (LossTerm term : {LossTerm::Reconstruction, LossTerm::Regularization,
                        LossTerm::Total}) {
    FiniteDiffOptions opt;
    opt.term = term;
    opt.max_params = 0;
    const FiniteDiffReport rep = finite_diff_check(m, x, opt);
    INFO(loss_term_name(term) << " worst " << rep.worst.parameter << " rel "
                              << rep.max_rel_error);
    REQUIRE(rep.max_rel_error < 1e-5);
    REQUIRE(rep.checked == 2 * 7 * 5 + 5 + 7);  // every parameter, both halves
  }
}

TEST_CASE("vae gradients pass a central-difference check per term", "[gradients]") {
  VaeModel v = small_vae(41);
  SeededRng rng(42);
  Tensor x = sample_uniform(rng, {6}, 0.05, 0.95);
  for (LossTerm term : {LossTerm::Reconstruction, LossTerm::Regularization,
                        LossTerm::Total}) {
    FiniteDiffOptions opt;
    opt.term = term;
    opt.max_params = 0;
    opt.noise_seed = 7;
    const FiniteDiffReport rep = finite_diff_check(v, x, opt);
    INFO(loss_term_name(term) << " worst " << rep.worst.parameter << " rel "
                              << rep.max_rel_error);
    REQUIRE(rep.max_rel_error < 1e-5);
  }
}

TEST_CASE("pure quadratic terms difference almost exactly", "[gradients]") {
  SaeModel m = small_sae(51, 1.0, 0.02);
  // With the sparsity weight zeroed the regularizer is a pure quadratic, so
  // central differences carry no truncation error at all.
  m.config.beta = 0.0;
  SeededRng rng(52);
  Tensor x = sample_gaussian(rng, {7});
  FiniteDiffOptions opt;
  opt.term = LossTerm::Regularization;
  opt.epsilon = 1e-4;
  opt.max_params = 0;
  const FiniteDiffReport rep = finite_diff_check(m, x, opt);
  REQUIRE(rep.max_rel_error < 1e-7);
}

TEST_CASE("difference checks subsample deterministically", "[gradients]") {
  SaeModel m = small_sae(61);
  SeededRng rng(62);
  Tensor x = sample_gaussian(rng, {7});
  FiniteDiffOptions opt;
  opt.max_params = 13;
  opt.subsample_seed = 99;
  const FiniteDiffReport a = finite_diff_check(m, x, opt);
  const FiniteDiffReport b = finite_diff_check(m, x, opt);
  REQUIRE(a.checked == 13);
  REQUIRE(a.max_rel_error == b.max_rel_error);
  REQUIRE(a.worst.parameter == b.worst.parameter);
  REQUIRE(!a.worst.parameter.empty());
  REQUIRE(a.worst.parameter.find('[') != std::string::npos);
}

TEST_CASE("difference options are validated", "[gradients]") {
  SaeModel m = small_sae(71);
  SeededRng rng(72);
  Tensor x = sample_gaussian(rng, {7});
  FiniteDiffOptions opt;
  opt.epsilon = 1e-8;
  REQUIRE_THROWS_AS(finite_diff_check(m, x, opt), DomainError);
  opt.epsilon = 1e-2;
  REQUIRE_THROWS_AS(finite_diff_check(m, x, opt), DomainError);

  VaeModel v = small_vae(73);
  Tensor vx = sample_uniform(rng, {6}, 0.0, 1.0);
  FiniteDiffOptions vopt;
  REQUIRE_THROWS_AS(finite_diff_check(v, vx, vopt), DomainError);
}

TEST_CASE("noise is shared between analytic and numeric passes", "[gradients]") {
  VaeModel v = small_vae(81);
  SeededRng rng(82);
  Tensor x = sample_uniform(rng, {6}, 0.05, 0.95);
  FiniteDiffOptions opt;
  opt.max_params = 40;
  opt.noise_seed = 5;
  const FiniteDiffReport a = finite_diff_check(v, x, opt);
  opt.noise_seed = 6;
  const FiniteDiffReport b = finite_diff_check(v, x, opt);
  REQUIRE(a.max_rel_error < 1e-5);
  REQUIRE(b.max_rel_error < 1e-5);
}

TEST_CASE("last-layer feature slices have the right lengths", "[gradients]") {
  VaeModel v = small_vae(91);
  SeededRng rng(92);
  Tensor x = sample_uniform(rng, {6}, 0.0, 1.0);
  Tensor eps = sample_gaussian(rng, {3});
  const SplitBackprop sb = backprop_split_with_eps(v, x, eps);

  const Tensor recon = last_layer_features(sb.bundle, LastLayerSelector::ReconDecoderLast);
  REQUIRE(recon.size() == 6 * 3 + 6);
  const Tensor reg = last_layer_features(sb.bundle, LastLayerSelector::RegEncoderLast);
  REQUIRE(reg.size() == 2 * (3 * 5 + 3));

  REQUIRE(recon[0] == sb.bundle.recon_decoder[0][0]);
  REQUIRE(reg[0] == sb.bundle.reg_encoder[2][0]);

  SaeModel m = small_sae(93);
  Tensor sx = sample_gaussian(rng, {7});
  const SplitBackprop ss = backprop_split(m, sx);
  REQUIRE_THROWS_AS(last_layer_features(ss.bundle, LastLayerSelector::ReconDecoderLast),
                    DomainError);
}

TEST_CASE("fixed noise makes split gradients reproducible", "[gradients]") {
  VaeModel v = small_vae(101);
  SeededRng r1(55);
  SeededRng r2(55);
  Tensor x = sample_uniform(r1, {6}, 0.0, 1.0);
  Tensor x2 = x;
  const SplitBackprop a = backprop_split(v, x, r1);
  SeededRng r3(55);
  (void)sample_uniform(r3, {6}, 0.0, 1.0);
  const SplitBackprop b = backprop_split(v, x2, r3);
  for (std::size_t p = 0; p < a.bundle.recon_encoder.size(); ++p) {
    for (std::size_t i = 0; i < a.bundle.recon_encoder[p].size(); ++i) {
      REQUIRE(a.bundle.recon_encoder[p][i] == b.bundle.recon_encoder[p][i]);
    }
  }
  (void)r2;
}
