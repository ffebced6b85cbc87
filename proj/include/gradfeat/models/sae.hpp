#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/rng.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/models/activations.hpp"
#include "gradfeat/models/loss.hpp"
#include "gradfeat/models/params.hpp"

namespace gradfeat {

struct SaeConfig {
  std::size_t input_dim = 8 * 8 * 3;  // flattened patch length
  std::size_t latent_dim = 400;
  double beta = 3.0;     // weight of the L1 latent sparsity term
  double lambda = 3e-3;  // weight decay on all parameters, biases included

  void validate() const {
    if (input_dim == 0 || latent_dim == 0) {
      throw DomainError("sae config: dimensions must be positive");
    }
    if (!(beta > 0.0) || !(lambda > 0.0)) {
      throw DomainError("sae config: beta and lambda must be positive");
    }
  }
};

// Single-hidden-layer sparse autoencoder: sigmoid latent, linear decoder.
//   z = sigmoid(enc_weight x + enc_bias)
//   x_hat = dec_weight z + dec_bias
// Loss: ||x - x_hat||^2 + beta * ||z||_1 + lambda * ||all parameters||^2.
struct SaeModel {
  SaeConfig config;
  Tensor enc_weight;  // [latent x input]
  Tensor enc_bias;    // [latent]
  Tensor dec_weight;  // [input x latent]
  Tensor dec_bias;    // [input]

  explicit SaeModel(SaeConfig cfg = {})
      : config(cfg),
        enc_weight({cfg.latent_dim, cfg.input_dim}),
        enc_bias({cfg.latent_dim}),
        dec_weight({cfg.input_dim, cfg.latent_dim}),
        dec_bias({cfg.input_dim}) {
    cfg.validate();
  }

  std::size_t input_dim() const { return config.input_dim; }
  std::size_t latent_dim() const { return config.latent_dim; }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
  static SaeModel init_random(SaeConfig cfg, std::uint64_t seed) {
    cfg.validate();
    SaeModel m(cfg);
    SeededRng rng(seed);
    const double enc_bound = 1.0 / std::sqrt(static_cast<double>(cfg.input_dim));
    const double dec_bound = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
    for (double& v : m.enc_weight.data()) v = rng.next_uniform(-enc_bound, enc_bound);
    for (double& v : m.dec_weight.data()) v = rng.next_uniform(-dec_bound, dec_bound);
    return m;
  }

  std::vector<ParamRef> encoder_params() {
    return {{"enc_weight", &enc_weight}, {"enc_bias", &enc_bias}};
  }
  std::vector<ParamRef> decoder_params() {
    return {{"dec_weight", &dec_weight}, {"dec_bias", &dec_bias}};
  }
  std::vector<ParamRef> params() {
    return {{"enc_weight", &enc_weight},
            {"enc_bias", &enc_bias},
            {"dec_weight", &dec_weight},
            {"dec_bias", &dec_bias}};
  }
  std::vector<ConstParamRef> params() const {
    return {{"enc_weight", &enc_weight},
            {"enc_bias", &enc_bias},
            {"dec_weight", &dec_weight},
            {"dec_bias", &dec_bias}};
  }
};

struct SaeForward {
  Tensor latent;  // z, in (0,1)
  Tensor recon;   // x_hat, unbounded (linear decoder)
};

inline void check_sae_input(const SaeModel& model, const Tensor& x) {
  if (x.rank() != 1 || x.size() != model.input_dim()) {
    throw ShapeError("sae input: expected [" +
                     std::to_string(model.input_dim()) + "], got " +
                     x.shape_string());
  }
  if (!all_finite(x)) throw DomainError("sae input: non-finite values");
}

inline SaeForward sae_forward(const SaeModel& model, const Tensor& x) {
  check_sae_input(model, x);
  Tensor pre = matvec(model.enc_weight, x);
  axpy(pre, 1.0, model.enc_bias);
  Tensor z = sigmoid(pre);
  Tensor recon = matvec(model.dec_weight, z);
  axpy(recon, 1.0, model.dec_bias);
  return {std::move(z), std::move(recon)};
}

inline double sae_weight_decay_sq(const SaeModel& model) {
  return sq_norm(model.enc_weight) + sq_norm(model.enc_bias) +
         sq_norm(model.dec_weight) + sq_norm(model.dec_bias);
}

inline LossBreakdown sae_loss(const SaeModel& model, const Tensor& x) {
  const SaeForward f = sae_forward(model, x);
  const Tensor residual = sub(f.recon, x);
  const double recon = sq_norm(residual);
  const double reg = model.config.beta * l1_norm(f.latent) +
                     model.config.lambda * sae_weight_decay_sq(model);
  return LossBreakdown::of(recon, reg);
}

}  // namespace gradfeat
