#pragma once

#include <cstddef>
#include <utility>

#include "gradfeat/core/rng.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/grad/backprop.hpp"
#include "gradfeat/grad/bundle.hpp"
#include "gradfeat/models/vae.hpp"

namespace gradfeat {

// Per-image feature families for the out-of-distribution classifier:
// the latent mean, the last-layer gradients of either loss term, or both
// gradient blocks concatenated (reconstruction block first).
enum class FeatureKind { Activation, ReconDecoderGrad, RegEncoderGrad, BothGrads };

inline constexpr FeatureKind kAllFeatureKinds[] = {
    FeatureKind::Activation, FeatureKind::ReconDecoderGrad,
    FeatureKind::RegEncoderGrad, FeatureKind::BothGrads};

inline const char* feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::Activation: return "activation";
    case FeatureKind::ReconDecoderGrad: return "recon_decoder_grad";
    case FeatureKind::RegEncoderGrad: return "reg_encoder_grad";
    case FeatureKind::BothGrads: return "both_grads";
  }
  return "?";
}

struct FeatureOptions {
  FeatureKind kind = FeatureKind::BothGrads;
  // Activation defaults to the latent mean; set to use a sampled latent.
  bool sampled_activation = false;
};

inline Tensor extract_features(const VaeModel& model, const Tensor& input,
                               const FeatureOptions& opt, SeededRng& rng) {
  check_vae_input(model, input);
  if (opt.kind == FeatureKind::Activation) {
    if (!opt.sampled_activation) {
      // The mean head needs no noise; leave the rng untouched.
      const Tensor eps = Tensor({model.latent_dim()});
      return vae_forward_with_eps(model, input, eps).mu;
    }
    return vae_forward(model, input, rng).z;
  }

  const Tensor eps = sample_gaussian(rng, {model.latent_dim()});
  const GradientBundle bundle =
      backprop_split_with_eps(model, input, eps).bundle;
  switch (opt.kind) {
    case FeatureKind::ReconDecoderGrad:
      return last_layer_features(bundle, LastLayerSelector::ReconDecoderLast);
    case FeatureKind::RegEncoderGrad:
      return last_layer_features(bundle, LastLayerSelector::RegEncoderLast);
    default: {
      const Tensor recon =
          last_layer_features(bundle, LastLayerSelector::ReconDecoderLast);
      const Tensor reg =
          last_layer_features(bundle, LastLayerSelector::RegEncoderLast);
      Tensor out({recon.size() + reg.size()});
      for (std::size_t i = 0; i < recon.size(); ++i) out[i] = recon[i];
      for (std::size_t i = 0; i < reg.size(); ++i) out[recon.size() + i] = reg[i];
      return out;
    }
  }
}

inline Tensor extract_features(const VaeModel& model, const Tensor& input,
                               FeatureKind kind, SeededRng& rng) {
  FeatureOptions opt;
  opt.kind = kind;
  return extract_features(model, input, opt, rng);
}

}  // namespace gradfeat
