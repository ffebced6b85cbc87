#pragma once

#include <cstddef>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/models/params.hpp"

namespace gradfeat {

// Weight gradients of the two loss terms, separated by term and by network
// half. Each vector mirrors the model's encoder_params() / decoder_params()
// order, tensor for tensor.
struct GradientBundle {
  ModelFamily family = ModelFamily::Sae;
  std::vector<Tensor> recon_encoder;  // dL/dtheta
  std::vector<Tensor> recon_decoder;  // dL/dphi
  std::vector<Tensor> reg_encoder;    // dOmega/dtheta
  std::vector<Tensor> reg_decoder;    // dOmega/dphi
};

// Total-loss gradients, one tensor per parameter.
struct ParamGradients {
  std::vector<Tensor> encoder;
  std::vector<Tensor> decoder;
};

namespace detail {
inline std::vector<Tensor> sum_blocks(const std::vector<Tensor>& a,
                                      const std::vector<Tensor>& b) {
  if (a.size() != b.size()) {
    throw ShapeError("gradient bundle: block counts differ");
  }
  std::vector<Tensor> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(add(a[i], b[i]));
  return out;
}
}  // namespace detail

// Per-parameter gradient of the total loss J = L + Omega, by linearity just
// the elementwise sum of the two term gradients.
inline ParamGradients grad_total(const GradientBundle& bundle) {
  return {detail::sum_blocks(bundle.recon_encoder, bundle.reg_encoder),
          detail::sum_blocks(bundle.recon_decoder, bundle.reg_decoder)};
}

enum class LastLayerSelector {
  ReconDecoderLast,  // dL/dphi restricted to the decoder output layer
  RegEncoderLast,    // dOmega/dtheta restricted to the mu / logvar heads
};

namespace detail {
inline void append_flat(std::vector<double>& out, const Tensor& t) {
  out.insert(out.end(), t.data().begin(), t.data().end());
}
}  // namespace detail

// Flattens the selected final-layer gradient block of a VAE bundle into a
// feature vector. Ordering is fixed: per layer, weights row-major, then the
// bias; for the encoder side the mu head precedes the logvar head. Stable
// across versions so saved features stay comparable.
inline Tensor last_layer_features(const GradientBundle& bundle,
                                  LastLayerSelector selector) {
  if (bundle.family != ModelFamily::Vae) {
    throw DomainError("last_layer_features: selector requires a VAE bundle");
  }
  std::vector<double> out;
  if (selector == LastLayerSelector::ReconDecoderLast) {
    // recon_decoder = [dec_weight, dec_bias]
    for (const Tensor& t : bundle.recon_decoder) detail::append_flat(out, t);
  } else {
    // reg_encoder = [enc_weight, enc_bias, mu_weight, mu_bias,
    //                logvar_weight, logvar_bias]; the heads are the last four.
    if (bundle.reg_encoder.size() != 6) {
      throw ShapeError("last_layer_features: unexpected VAE encoder layout");
    }
    for (std::size_t i = 2; i < 6; ++i) {
      detail::append_flat(out, bundle.reg_encoder[i]);
    }
  }
  return Tensor::from_vector(std::move(out));
}

}  // namespace gradfeat
