#pragma once

#include <algorithm>
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

struct VaeConfig {
  std::size_t input_dim = 28 * 28 * 3;
  std::size_t hidden_dim = 512;
  std::size_t latent_dim = 32;
  // Raw log-variance head outputs are clamped into this window before exp.
  double logvar_min = -10.0;
  double logvar_max = 10.0;

  void validate() const {
    if (input_dim == 0 || hidden_dim == 0 || latent_dim == 0) {
      throw DomainError("vae config: dimensions must be positive");
    }
    if (!(logvar_min < logvar_max)) {
      throw DomainError("vae config: logvar bounds out of order");
    }
  }
};

// Variational autoencoder with a sigmoid trunk, linear mu / logvar heads,
// and a single sigmoid decoder layer. Inputs are [0,1] pixels; the
// reconstruction likelihood is Bernoulli, so the input domain is enforced.
// The prior is the standard normal; nothing about it is learned.
struct VaeModel {
  VaeConfig config;
  Tensor enc_weight;     // [hidden x input]
  Tensor enc_bias;       // [hidden]
  Tensor mu_weight;      // [latent x hidden]
  Tensor mu_bias;        // [latent]
  Tensor logvar_weight;  // [latent x hidden]
  Tensor logvar_bias;    // [latent]
  Tensor dec_weight;     // [input x latent]
  Tensor dec_bias;       // [input]

  explicit VaeModel(VaeConfig cfg = {})
      : config(cfg),
        enc_weight({cfg.hidden_dim, cfg.input_dim}),
        enc_bias({cfg.hidden_dim}),
        mu_weight({cfg.latent_dim, cfg.hidden_dim}),
        mu_bias({cfg.latent_dim}),
        logvar_weight({cfg.latent_dim, cfg.hidden_dim}),
        logvar_bias({cfg.latent_dim}),
        dec_weight({cfg.input_dim, cfg.latent_dim}),
        dec_bias({cfg.input_dim}) {
    cfg.validate();
  }

  std::size_t input_dim() const { return config.input_dim; }
  std::size_t hidden_dim() const { return config.hidden_dim; }
  std::size_t latent_dim() const { return config.latent_dim; }

  static VaeModel init_random(VaeConfig cfg, std::uint64_t seed) {
    cfg.validate();
    VaeModel m(cfg);
    SeededRng rng(seed);
    const double in_b = 1.0 / std::sqrt(static_cast<double>(cfg.input_dim));
    const double hid_b = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));
    const double lat_b = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
    for (double& v : m.enc_weight.data()) v = rng.next_uniform(-in_b, in_b);
    for (double& v : m.mu_weight.data()) v = rng.next_uniform(-hid_b, hid_b);
    for (double& v : m.logvar_weight.data()) v = rng.next_uniform(-hid_b, hid_b);
    for (double& v : m.dec_weight.data()) v = rng.next_uniform(-lat_b, lat_b);
    return m;
  }

  std::vector<ParamRef> encoder_params() {
    return {{"enc_weight", &enc_weight},       {"enc_bias", &enc_bias},
            {"mu_weight", &mu_weight},         {"mu_bias", &mu_bias},
            {"logvar_weight", &logvar_weight}, {"logvar_bias", &logvar_bias}};
  }
  std::vector<ParamRef> decoder_params() {
    return {{"dec_weight", &dec_weight}, {"dec_bias", &dec_bias}};
  }
  std::vector<ParamRef> params() {
    auto out = encoder_params();
    for (auto& p : decoder_params()) out.push_back(p);
    return out;
  }
  std::vector<ConstParamRef> params() const {
    return {{"enc_weight", &enc_weight},       {"enc_bias", &enc_bias},
            {"mu_weight", &mu_weight},         {"mu_bias", &mu_bias},
            {"logvar_weight", &logvar_weight}, {"logvar_bias", &logvar_bias},
            {"dec_weight", &dec_weight},       {"dec_bias", &dec_bias}};
  }
};

inline void check_vae_input(const VaeModel& model, const Tensor& x) {
  if (x.rank() != 1 || x.size() != model.input_dim()) {
    throw ShapeError("vae input: expected [" +
                     std::to_string(model.input_dim()) + "], got " +
                     x.shape_string());
  }
  for (double v : x.data()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError(
          "vae input: values must lie in [0,1] for the Bernoulli likelihood");
    }
  }
}

struct VaeForward {
  Tensor hidden;        // trunk activations, in (0,1)
  Tensor mu;            // [latent]
  Tensor logvar;        // [latent], clamped
  Tensor logvar_raw;    // [latent], before the clamp (backprop gates on it)
  Tensor eps;           // the N(0,I) draw used for z
  Tensor z;             // mu + exp(logvar/2) * eps
  Tensor recon_logit;   // decoder pre-activation u
  Tensor recon;         // sigmoid(u), clamped strictly inside (0,1)
};

// Deterministic forward pass for a caller-supplied noise vector. Everything
// stochastic in the VAE reduces to this plus one Gaussian draw.
inline VaeForward vae_forward_with_eps(const VaeModel& model, const Tensor& x,
                                       const Tensor& eps) {
  check_vae_input(model, x);
  if (eps.rank() != 1 || eps.size() != model.latent_dim()) {
    throw ShapeError("vae eps: expected [" +
                     std::to_string(model.latent_dim()) + "], got " +
                     eps.shape_string());
  }
  VaeForward f;
  Tensor pre = matvec(model.enc_weight, x);
  axpy(pre, 1.0, model.enc_bias);
  f.hidden = sigmoid(pre);

  f.mu = matvec(model.mu_weight, f.hidden);
  axpy(f.mu, 1.0, model.mu_bias);

  f.logvar_raw = matvec(model.logvar_weight, f.hidden);
  axpy(f.logvar_raw, 1.0, model.logvar_bias);
  f.logvar = f.logvar_raw;
  for (double& v : f.logvar.data()) {
    v = std::clamp(v, model.config.logvar_min, model.config.logvar_max);
  }

  f.eps = eps;
  f.z = f.mu;
  for (std::size_t j = 0; j < f.z.size(); ++j) {
    f.z[j] += std::exp(0.5 * f.logvar[j]) * eps[j];
  }

  f.recon_logit = matvec(model.dec_weight, f.z);
  axpy(f.recon_logit, 1.0, model.dec_bias);
  f.recon = f.recon_logit;
  for (double& v : f.recon.data()) {
    // Keep the reported reconstruction strictly inside (0,1). The loss and
    // gradients work from the logits, so this clamp never touches them.
    v = std::clamp(sigmoid(v), 1e-15, 1.0 - 1e-15);
  }
  return f;
}

inline VaeForward vae_forward(const VaeModel& model, const Tensor& x,
                              SeededRng& rng) {
  check_vae_input(model, x);
  const Tensor eps = sample_gaussian(rng, {model.latent_dim()});
  return vae_forward_with_eps(model, x, eps);
}

// Bernoulli NLL of x under the decoder logits.
inline double vae_recon_nll(const Tensor& recon_logit, const Tensor& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += bce_from_logit(recon_logit[i], x[i]);
  }
  return acc;
}

inline LossBreakdown vae_loss_with_eps(const VaeModel& model, const Tensor& x,
                                       const Tensor& eps) {
  const VaeForward f = vae_forward_with_eps(model, x, eps);
  const double recon = vae_recon_nll(f.recon_logit, x);
  const double reg = kl_diag_gaussian(f.mu, f.logvar);
  return LossBreakdown::of(recon, reg);
}

// Single-sample estimate of the VAE objective: one reparameterized draw for
// the reconstruction expectation, closed-form KL for the regularizer.
inline LossBreakdown vae_loss(const VaeModel& model, const Tensor& x,
                              SeededRng& rng) {
  check_vae_input(model, x);
  const Tensor eps = sample_gaussian(rng, {model.latent_dim()});
  return vae_loss_with_eps(model, x, eps);
}

}  // namespace gradfeat
