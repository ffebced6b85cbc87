#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/grad/backprop.hpp"
#include "gradfeat/models/activations.hpp"
#include "gradfeat/models/sae.hpp"

namespace gradfeat {

// Which loss term supplies the decoder-weight gradient space.
enum class GradientSource { DecoderTotal, DecoderRecon };

// Which patch the gradient space is evaluated at. Distorted: both patches
// project onto the gradient at the distorted patch. PerImage: each patch's
// own gradient is the feature and the projection step is skipped.
enum class GradientAnchor { Distorted, PerImage };

struct IqaConfig {
  std::size_t patch_size = 8;
  std::size_t patch_stride = 8;
  GradientSource gradient_source = GradientSource::DecoderTotal;
  GradientAnchor gradient_anchor = GradientAnchor::Distorted;
  bool invert_nonlinearity = true;

  void validate() const {
    if (patch_size == 0) throw DomainError("patch_size must be >= 1");
    if (patch_stride == 0) throw DomainError("patch_stride must be >= 1");
  }
};

namespace detail {

inline Tensor decoder_weight_gradient(const SaeModel& model,
                                      const Tensor& anchor_patch,
                                      GradientSource source) {
  const GradientBundle b = backprop_split(model, anchor_patch).bundle;
  Tensor g = b.recon_decoder[0];
  if (source == GradientSource::DecoderTotal) axpy(g, 1.0, b.reg_decoder[0]);
  if (max_abs(g) == 0.0) {
    throw DegenerateProjectionError(
        source == GradientSource::DecoderRecon
            ? "decoder gradient vanished: anchor patch reconstructs exactly"
            : "decoder gradient vanished for the total loss");
  }
  return g;
}

// Encoder representation used for projection: the latent, or with inversion
// the pre-activation recovered by logit on the clamped latent.
inline Tensor encoder_representation(const SaeModel& model, const Tensor& patch,
                                     bool invert_nonlinearity) {
  Tensor z = sae_forward(model, patch).latent;
  if (invert_nonlinearity) {
    for (std::size_t j = 0; j < z.size(); ++j) {
      z[j] = logit(std::clamp(z[j], 1e-6, 1.0 - 1e-6));
    }
  }
  return z;
}

}  // namespace detail

// Projects target_patch onto the decoder-weight gradient space evaluated at
// anchor_patch: G [d_x x d_z] times the target's encoder representation.
inline Tensor gradient_projection(const SaeModel& model,
                                  const Tensor& anchor_patch,
                                  const Tensor& target_patch,
                                  const IqaConfig& cfg = {}) {
  cfg.validate();
  check_sae_input(model, anchor_patch);
  check_sae_input(model, target_patch);
  const Tensor g =
      detail::decoder_weight_gradient(model, anchor_patch, cfg.gradient_source);
  const Tensor y =
      detail::encoder_representation(model, target_patch, cfg.invert_nonlinearity);
  return matvec(g, y);
}

}  // namespace gradfeat
