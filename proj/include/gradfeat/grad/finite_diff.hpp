#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/rng.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/grad/backprop.hpp"
#include "gradfeat/grad/bundle.hpp"
#include "gradfeat/models/sae.hpp"
#include "gradfeat/models/vae.hpp"

namespace gradfeat {

// Central-difference check of the analytic gradients. Each selected
// coordinate is nudged by +/-epsilon and the loss term re-evaluated, so the
// check is slow but independent of the backprop code it validates.

enum class LossTerm { Reconstruction, Regularization, Total };

inline const char* loss_term_name(LossTerm t) {
  switch (t) {
    case LossTerm::Reconstruction: return "reconstruction";
    case LossTerm::Regularization: return "regularization";
    case LossTerm::Total: return "total";
  }
  return "?";
}

struct FiniteDiffOptions {
  double epsilon = 1e-5;
  LossTerm term = LossTerm::Total;
  // Cap on checked coordinates; 0 means all. Larger models are subsampled
  // without replacement, driven by subsample_seed.
  std::size_t max_params = 200;
  std::uint64_t subsample_seed = 0;
  // Mandatory for stochastic models: fixes the latent noise so the loss is a
  // plain deterministic function of the parameters.
  std::optional<std::uint64_t> noise_seed;

  void validate() const {
    if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
      throw DomainError("finite diff epsilon must lie in [1e-7, 1e-3], got " +
                        std::to_string(epsilon));
    }
  }
};

struct FiniteDiffEntry {
  std::string parameter;  // e.g. "enc_weight[17]"
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct FiniteDiffReport {
  LossTerm term = LossTerm::Total;
  double epsilon = 0.0;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  FiniteDiffEntry worst;
};

namespace detail {

// The probe re-evaluates the perturbed losses with its own forward-pass code
// in extended precision. Two reasons. Independence: a bug shared between the
// production forward pass and the backprop cannot hide from a probe that
// computes the loss separately. Precision: the relative-error denominator is
// floored at 1e-8, so for near-zero gradient coordinates the probe's own
// rounding noise — about ulp(loss)/2eps, or ~1e-10 for a loss of order 10 in
// double — would read as a gradient defect. Carrying the evaluation in long
// double pushes that noise three orders of magnitude below the 1e-5 gate.
using Wide = long double;

inline Wide wide_sigmoid(Wide x) {
  if (x >= 0.0L) {
    const Wide e = std::exp(-x);
    return 1.0L / (1.0L + e);
  }
  const Wide e = std::exp(x);
  return e / (1.0L + e);
}

inline Wide wide_softplus(Wide x) {
  if (x > 0.0L) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// w v + b for row-major w [rows x cols].
inline std::vector<Wide> wide_affine(const Tensor& w, const Tensor& b,
                                     const std::vector<Wide>& v) {
  const std::size_t rows = w.dim(0);
  const std::size_t cols = w.dim(1);
  std::vector<Wide> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    Wide acc = b[r];
    for (std::size_t c = 0; c < cols; ++c) {
      acc += static_cast<Wide>(w[r * cols + c]) * v[c];
    }
    out[r] = acc;
  }
  return out;
}

inline Wide wide_sq_norm(const Tensor& t) {
  Wide acc = 0.0L;
  for (double v : t.data()) acc += static_cast<Wide>(v) * v;
  return acc;
}

inline std::vector<Wide> widen(const Tensor& t) {
  return std::vector<Wide>(t.data().begin(), t.data().end());
}

inline Wide sae_term_loss_wide(const SaeModel& m, const Tensor& x,
                               LossTerm term) {
  const std::vector<Wide> pre = wide_affine(m.enc_weight, m.enc_bias, widen(x));
  std::vector<Wide> z(pre.size());
  for (std::size_t j = 0; j < pre.size(); ++j) z[j] = wide_sigmoid(pre[j]);
  const std::vector<Wide> recon = wide_affine(m.dec_weight, m.dec_bias, z);
  Wide recon_loss = 0.0L;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    const Wide d = recon[i] - x[i];
    recon_loss += d * d;
  }
  if (term == LossTerm::Reconstruction) return recon_loss;
  Wide l1 = 0.0L;
  for (Wide zj : z) l1 += std::abs(zj);
  const Wide decay = wide_sq_norm(m.enc_weight) + wide_sq_norm(m.enc_bias) +
                     wide_sq_norm(m.dec_weight) + wide_sq_norm(m.dec_bias);
  const Wide reg = m.config.beta * l1 + m.config.lambda * decay;
  return term == LossTerm::Regularization ? reg : recon_loss + reg;
}

inline Wide vae_term_loss_wide(const VaeModel& m, const Tensor& x,
                               const Tensor& eps, LossTerm term) {
  const std::vector<Wide> pre = wide_affine(m.enc_weight, m.enc_bias, widen(x));
  std::vector<Wide> hidden(pre.size());
  for (std::size_t j = 0; j < pre.size(); ++j) hidden[j] = wide_sigmoid(pre[j]);
  const std::vector<Wide> mu = wide_affine(m.mu_weight, m.mu_bias, hidden);
  std::vector<Wide> lv = wide_affine(m.logvar_weight, m.logvar_bias, hidden);
  for (Wide& v : lv) {
    v = std::clamp(v, static_cast<Wide>(m.config.logvar_min),
                   static_cast<Wide>(m.config.logvar_max));
  }
  Wide kl = 0.0L;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    kl += mu[j] * mu[j] + std::exp(lv[j]) - lv[j] - 1.0L;
  }
  kl *= 0.5L;
  if (term == LossTerm::Regularization) return kl;
  std::vector<Wide> z(mu.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    z[j] = mu[j] + std::exp(0.5L * lv[j]) * eps[j];
  }
  const std::vector<Wide> logits = wide_affine(m.dec_weight, m.dec_bias, z);
  Wide nll = 0.0L;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    nll += wide_softplus(logits[i]) - x[i] * logits[i];
  }
  return term == LossTerm::Reconstruction ? nll : nll + kl;
}

inline std::vector<Tensor> term_blocks(const GradientBundle& b, LossTerm t) {
  auto concat = [](std::vector<Tensor> enc, const std::vector<Tensor>& dec) {
    enc.insert(enc.end(), dec.begin(), dec.end());
    return enc;
  };
  switch (t) {
    case LossTerm::Reconstruction:
      return concat(b.recon_encoder, b.recon_decoder);
    case LossTerm::Regularization:
      return concat(b.reg_encoder, b.reg_decoder);
    case LossTerm::Total: {
      ParamGradients g = grad_total(b);
      return concat(std::move(g.encoder), g.decoder);
    }
  }
  throw DomainError("unknown loss term");
}

// rel = |a - n| / max(|a|, |n|, 1e-8); the floor keeps near-zero gradients
// from blowing up the ratio.
inline double rel_error(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

template <typename Model, typename TermLoss>
FiniteDiffReport finite_diff_engine(Model model, TermLoss&& term_loss,
                                    const std::vector<Tensor>& analytic,
                                    const FiniteDiffOptions& opt) {
  auto prs = model.params();

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t p = 0; p < prs.size(); ++p) {
    for (std::size_t i = 0; i < prs[p].tensor->size(); ++i) {
      coords.emplace_back(p, i);
    }
  }
  if (opt.max_params != 0 && coords.size() > opt.max_params) {
    SeededRng rng(opt.subsample_seed);
    for (std::size_t i = 0; i < opt.max_params; ++i) {
      const std::size_t j = i + rng.next_below(coords.size() - i);
      std::swap(coords[i], coords[j]);
    }
    coords.resize(opt.max_params);
  }

  FiniteDiffReport rep;
  rep.term = opt.term;
  rep.epsilon = opt.epsilon;
  for (const auto& [p, i] : coords) {
    double& v = (*prs[p].tensor)[i];
    const double saved = v;
    v = saved + opt.epsilon;
    const Wide fp = term_loss(model);
    v = saved - opt.epsilon;
    const Wide fm = term_loss(model);
    v = saved;

    const double numeric = static_cast<double>(
        (fp - fm) / (2.0L * static_cast<Wide>(opt.epsilon)));
    const double a = analytic[p][i];
    const double rel = rel_error(a, numeric);
    ++rep.checked;
    if (rel >= rep.max_rel_error) {
      rep.max_rel_error = rel;
      rep.worst = {prs[p].name + "[" + std::to_string(i) + "]", a, numeric,
                   rel};
    }
  }
  return rep;
}

}  // namespace detail

inline FiniteDiffReport finite_diff_check(const SaeModel& model,
                                          const Tensor& x,
                                          const FiniteDiffOptions& opt = {}) {
  opt.validate();
  check_sae_input(model, x);
  const SplitBackprop split = backprop_split(model, x);
  const std::vector<Tensor> analytic =
      detail::term_blocks(split.bundle, opt.term);
  const LossTerm term = opt.term;
  auto loss = [&x, term](const SaeModel& m) {
    return detail::sae_term_loss_wide(m, x, term);
  };
  return detail::finite_diff_engine(model, loss, analytic, opt);
}

inline FiniteDiffReport finite_diff_check(const VaeModel& model,
                                          const Tensor& x,
                                          const FiniteDiffOptions& opt = {}) {
  opt.validate();
  check_vae_input(model, x);
  if (!opt.noise_seed) {
    throw DomainError(
        "finite diff on a stochastic model: set noise_seed so the loss is "
        "deterministic");
  }
  SeededRng noise(*opt.noise_seed);
  const Tensor eps = sample_gaussian(noise, {model.latent_dim()});
  const SplitBackprop split = backprop_split_with_eps(model, x, eps);
  const std::vector<Tensor> analytic =
      detail::term_blocks(split.bundle, opt.term);
  const LossTerm term = opt.term;
  auto loss = [&x, &eps, term](const VaeModel& m) {
    return detail::vae_term_loss_wide(m, x, eps, term);
  };
  return detail::finite_diff_engine(model, loss, analytic, opt);
}

}  // namespace gradfeat
