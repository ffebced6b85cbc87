#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/rng.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/grad/backprop.hpp"
#include "gradfeat/models/params.hpp"
#include "gradfeat/models/sae.hpp"
#include "gradfeat/models/vae.hpp"
#include "gradfeat/train/optimizer.hpp"

namespace gradfeat {

struct TrainReport {
  std::vector<LossBreakdown> epoch_loss;  // per-epoch mean over examples
  std::uint64_t final_checksum = 0;
  double wall_seconds = 0.0;
};

namespace detail {

// Shared minibatch loop. grad_fn(model, example, epoch, index) returns the
// one-pass total gradient plus the loss split for reporting.
template <typename Model, typename GradFn>
TrainReport train_loop(Model& model, const std::vector<Tensor>& dataset,
                       const OptimizerConfig& cfg, GradFn&& grad_fn) {
  cfg.validate();
  if (dataset.empty()) throw DomainError("train: empty dataset");
  const auto start = std::chrono::steady_clock::now();

  Optimizer opt(cfg, model.params());
  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);

  std::vector<Tensor> batch_sum;
  for (const ParamRef& p : model.params()) batch_sum.emplace_back(p.tensor->shape());

  TrainReport report;
  report.epoch_loss.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SeededRng shuffle_rng(SeededRng::derive(cfg.seed, epoch));
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = shuffle_rng.next_below(i);
      std::swap(order[i - 1], order[j]);
    }

    double recon_sum = 0.0;
    double reg_sum = 0.0;
    std::size_t cursor = 0;
    while (cursor < n) {
      const std::size_t take = std::min(cfg.batch_size, n - cursor);
      for (Tensor& t : batch_sum) {
        for (double& v : t.data()) v = 0.0;
      }
      for (std::size_t b = 0; b < take; ++b) {
        const std::size_t idx = order[cursor + b];
        TotalBackprop tb = grad_fn(model, dataset[idx], epoch, idx);
        recon_sum += tb.loss.recon;
        reg_sum += tb.loss.reg;
        std::size_t slot = 0;
        for (const Tensor& g : tb.grads.encoder) axpy(batch_sum[slot++], 1.0, g);
        for (const Tensor& g : tb.grads.decoder) axpy(batch_sum[slot++], 1.0, g);
      }
      const double inv = 1.0 / static_cast<double>(take);
      for (Tensor& t : batch_sum) {
        for (double& v : t.data()) v *= inv;
      }
      opt.step(batch_sum);
      cursor += take;
    }

    const double nd = static_cast<double>(n);
    const LossBreakdown mean = LossBreakdown::of(recon_sum / nd, reg_sum / nd);
    if (!std::isfinite(mean.total)) {
      throw DivergenceError("training diverged at epoch " +
                            std::to_string(epoch + 1) + ": mean loss " +
                            std::to_string(mean.total));
    }
    report.epoch_loss.push_back(mean);
  }

  report.final_checksum = model_checksum(std::as_const(model));
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

}  // namespace detail

// SAE expects whitened real-valued inputs of the model's input dimension.
inline TrainReport train(SaeModel& model, const std::vector<Tensor>& dataset,
                         const OptimizerConfig& cfg) {
  for (const Tensor& x : dataset) check_sae_input(model, x);
  return detail::train_loop(
      model, dataset, cfg,
      [](SaeModel& m, const Tensor& x, std::size_t, std::size_t) {
        return backprop_total(m, x);
      });
}

// VAE expects [0,1] inputs. The latent noise draw is a pure function of
// (config seed, epoch, example index), so a rerun reproduces every update.
inline TrainReport train(VaeModel& model, const std::vector<Tensor>& dataset,
                         const OptimizerConfig& cfg) {
  for (const Tensor& x : dataset) check_vae_input(model, x);
  return detail::train_loop(
      model, dataset, cfg,
      [&cfg](VaeModel& m, const Tensor& x, std::size_t epoch, std::size_t idx) {
        const std::uint64_t stream =
            (static_cast<std::uint64_t>(epoch) << 32) ^
            static_cast<std::uint64_t>(idx);
        SeededRng noise(SeededRng::derive(cfg.seed ^ 0x9e3779b97f4a7c15ULL,
                                          stream));
        const Tensor eps = sample_gaussian(noise, {m.latent_dim()});
        return backprop_total_with_eps(m, x, eps);
      });
}

}  // namespace gradfeat
