#pragma once

#include <cmath>
#include <utility>

#include "gradfeat/core/rng.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/grad/bundle.hpp"
#include "gradfeat/models/sae.hpp"
#include "gradfeat/models/vae.hpp"

namespace gradfeat {

// Manual backpropagation, one input at a time. Every loss is backpropagated
// twice: once from the reconstruction term and once from the regularization
// term, giving the four separated weight-gradient blocks. backprop_total
// computes the gradient of J = L + Omega in a single pass; the split path
// must sum to it, and tests pin that identity.

struct SplitBackprop {
  GradientBundle bundle;
  LossBreakdown loss;
};

struct TotalBackprop {
  ParamGradients grads;
  LossBreakdown loss;
};

namespace detail {
// Subgradient of |.| with sign(0) defined as 0; sigmoid latents are strictly
// positive, so the kink is unreachable there.
inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
}  // namespace detail

// ---------------------------------------------------------------------------
// SAE

inline SplitBackprop backprop_split(const SaeModel& m, const Tensor& x) {
  check_sae_input(m, x);
  const double beta = m.config.beta;
  const double lambda = m.config.lambda;

  // Forward.
  Tensor pre = matvec(m.enc_weight, x);
  axpy(pre, 1.0, m.enc_bias);
  const Tensor z = sigmoid(pre);
  Tensor recon = matvec(m.dec_weight, z);
  axpy(recon, 1.0, m.dec_bias);
  const Tensor residual = sub(recon, x);

  const double loss_recon = sq_norm(residual);
  const double loss_reg = beta * l1_norm(z) + lambda * sae_weight_decay_sq(m);

  // Reconstruction term.
  const Tensor d_recon = scale(residual, 2.0);      // dL/drecon
  Tensor dz = matvec_t(m.dec_weight, d_recon);      // dL/dz
  Tensor da = dz;                                   // dL/dpre
  for (std::size_t j = 0; j < da.size(); ++j) da[j] *= sigmoid_grad_from_value(z[j]);

  GradientBundle b;
  b.family = ModelFamily::Sae;
  b.recon_encoder = {outer(da, x), da};
  b.recon_decoder = {outer(d_recon, z), d_recon};

  // Regularization term: beta * ||z||_1 through the sigmoid, plus weight decay.
  Tensor ra({z.size()});
  for (std::size_t j = 0; j < z.size(); ++j) {
    ra[j] = beta * detail::sign0(z[j]) * sigmoid_grad_from_value(z[j]);
  }
  Tensor reg_enc_w = outer(ra, x);
  axpy(reg_enc_w, 2.0 * lambda, m.enc_weight);
  Tensor reg_enc_b = ra;
  axpy(reg_enc_b, 2.0 * lambda, m.enc_bias);
  b.reg_encoder = {std::move(reg_enc_w), std::move(reg_enc_b)};
  b.reg_decoder = {scale(m.dec_weight, 2.0 * lambda),
                   scale(m.dec_bias, 2.0 * lambda)};

  return {std::move(b), LossBreakdown::of(loss_recon, loss_reg)};
}

// One-pass gradient of J for the SAE; the fast path used by training.
inline TotalBackprop backprop_total(const SaeModel& m, const Tensor& x) {
  check_sae_input(m, x);
  const double beta = m.config.beta;
  const double lambda = m.config.lambda;

  Tensor pre = matvec(m.enc_weight, x);
  axpy(pre, 1.0, m.enc_bias);
  const Tensor z = sigmoid(pre);
  Tensor recon = matvec(m.dec_weight, z);
  axpy(recon, 1.0, m.dec_bias);
  const Tensor residual = sub(recon, x);

  const double loss_recon = sq_norm(residual);
  const double loss_reg = beta * l1_norm(z) + lambda * sae_weight_decay_sq(m);

  const Tensor d_recon = scale(residual, 2.0);
  Tensor dz = matvec_t(m.dec_weight, d_recon);
  Tensor da({z.size()});
  for (std::size_t j = 0; j < z.size(); ++j) {
    da[j] = (dz[j] + beta * detail::sign0(z[j])) * sigmoid_grad_from_value(z[j]);
  }

  Tensor g_enc_w = outer(da, x);
  axpy(g_enc_w, 2.0 * lambda, m.enc_weight);
  Tensor g_enc_b = da;
  axpy(g_enc_b, 2.0 * lambda, m.enc_bias);
  Tensor g_dec_w = outer(d_recon, z);
  axpy(g_dec_w, 2.0 * lambda, m.dec_weight);
  Tensor g_dec_b = d_recon;
  axpy(g_dec_b, 2.0 * lambda, m.dec_bias);

  ParamGradients g;
  g.encoder = {std::move(g_enc_w), std::move(g_enc_b)};
  g.decoder = {std::move(g_dec_w), std::move(g_dec_b)};
  return {std::move(g), LossBreakdown::of(loss_recon, loss_reg)};
}

// ---------------------------------------------------------------------------
// VAE. One epsilon draw serves both backward passes, so the stochastic loss
// is a deterministic function of (model, input, epsilon).

namespace detail {

struct VaeDeltas {
  Tensor d_mu;
  Tensor d_logvar;  // already gated by the clamp indicator
};

// Propagates head deltas through the trunk and fills encoder blocks.
inline std::vector<Tensor> vae_encoder_blocks(const VaeModel& m,
                                              const Tensor& x,
                                              const VaeForward& f,
                                              const VaeDeltas& d) {
  Tensor dh = matvec_t(m.mu_weight, d.d_mu);
  axpy(dh, 1.0, matvec_t(m.logvar_weight, d.d_logvar));
  Tensor da = dh;
  for (std::size_t j = 0; j < da.size(); ++j) {
    da[j] *= sigmoid_grad_from_value(f.hidden[j]);
  }
  return {outer(da, x),           da,
          outer(d.d_mu, f.hidden), d.d_mu,
          outer(d.d_logvar, f.hidden), d.d_logvar};
}

inline double clamp_gate(const VaeModel& m, double logvar_raw) {
  return (logvar_raw > m.config.logvar_min && logvar_raw < m.config.logvar_max)
             ? 1.0
             : 0.0;
}

}  // namespace detail

inline SplitBackprop backprop_split_with_eps(const VaeModel& m, const Tensor& x,
                                             const Tensor& eps) {
  const VaeForward f = vae_forward_with_eps(m, x, eps);
  const double loss_recon = vae_recon_nll(f.recon_logit, x);
  const double loss_reg = kl_diag_gaussian(f.mu, f.logvar);

  // Reconstruction term. d(NLL)/d(logit) = sigmoid(u) - x, exact.
  Tensor du({x.size()});
  for (std::size_t i = 0; i < x.size(); ++i) du[i] = sigmoid(f.recon_logit[i]) - x[i];
  const Tensor dz = matvec_t(m.dec_weight, du);

  detail::VaeDeltas recon_d;
  recon_d.d_mu = dz;
  recon_d.d_logvar = Tensor({m.latent_dim()});
  for (std::size_t j = 0; j < m.latent_dim(); ++j) {
    recon_d.d_logvar[j] = dz[j] * eps[j] * 0.5 * std::exp(0.5 * f.logvar[j]) *
                          detail::clamp_gate(m, f.logvar_raw[j]);
  }

  GradientBundle b;
  b.family = ModelFamily::Vae;
  b.recon_encoder = detail::vae_encoder_blocks(m, x, f, recon_d);
  b.recon_decoder = {outer(du, f.z), du};

  // Regularization term: closed-form KL depends only on the encoder outputs.
  detail::VaeDeltas reg_d;
  reg_d.d_mu = f.mu;
  reg_d.d_logvar = Tensor({m.latent_dim()});
  for (std::size_t j = 0; j < m.latent_dim(); ++j) {
    reg_d.d_logvar[j] = 0.5 * (std::exp(f.logvar[j]) - 1.0) *
                        detail::clamp_gate(m, f.logvar_raw[j]);
  }
  b.reg_encoder = detail::vae_encoder_blocks(m, x, f, reg_d);
  b.reg_decoder = {Tensor(m.dec_weight.shape()), Tensor(m.dec_bias.shape())};

  return {std::move(b), LossBreakdown::of(loss_recon, loss_reg)};
}

inline SplitBackprop backprop_split(const VaeModel& m, const Tensor& x,
                                    SeededRng& rng) {
  check_vae_input(m, x);
  const Tensor eps = sample_gaussian(rng, {m.latent_dim()});
  return backprop_split_with_eps(m, x, eps);
}

inline TotalBackprop backprop_total_with_eps(const VaeModel& m, const Tensor& x,
                                             const Tensor& eps) {
  const VaeForward f = vae_forward_with_eps(m, x, eps);
  const double loss_recon = vae_recon_nll(f.recon_logit, x);
  const double loss_reg = kl_diag_gaussian(f.mu, f.logvar);

  Tensor du({x.size()});
  for (std::size_t i = 0; i < x.size(); ++i) du[i] = sigmoid(f.recon_logit[i]) - x[i];
  const Tensor dz = matvec_t(m.dec_weight, du);

  detail::VaeDeltas d;
  d.d_mu = add(dz, f.mu);
  d.d_logvar = Tensor({m.latent_dim()});
  for (std::size_t j = 0; j < m.latent_dim(); ++j) {
    d.d_logvar[j] = (dz[j] * eps[j] * 0.5 * std::exp(0.5 * f.logvar[j]) +
                     0.5 * (std::exp(f.logvar[j]) - 1.0)) *
                    detail::clamp_gate(m, f.logvar_raw[j]);
  }

  ParamGradients g;
  g.encoder = detail::vae_encoder_blocks(m, x, f, d);
  g.decoder = {outer(du, f.z), du};
  return {std::move(g), LossBreakdown::of(loss_recon, loss_reg)};
}

}  // namespace gradfeat
