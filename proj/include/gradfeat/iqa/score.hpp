#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/iqa/metrics.hpp"
#include "gradfeat/iqa/projection.hpp"
#include "gradfeat/models/sae.hpp"
#include "gradfeat/train/patches.hpp"
#include "gradfeat/train/zca.hpp"

namespace gradfeat {

// Full-reference quality score in [-1, 1]: tile both images, whiten each
// tile with the model's training transform, project reference and distorted
// tiles onto the anchored decoder gradient space, and average the per-tile
// Spearman correlations. Identical images score exactly 1.
inline double iqa_score(const SaeModel& model, const ZcaTransform& zca,
                        const Tensor& ref_image, const Tensor& dist_image,
                        const IqaConfig& cfg = {}) {
  cfg.validate();
  require_same_shape(ref_image, dist_image, "iqa_score");
  const std::vector<Tensor> ref_tiles =
      tile_patches(ref_image, cfg.patch_size, cfg.patch_stride);
  const std::vector<Tensor> dist_tiles =
      tile_patches(dist_image, cfg.patch_size, cfg.patch_stride);
  if (ref_tiles.size() < 2) {
    throw DomainError("iqa score: need at least 2 tiles, got " +
                      std::to_string(ref_tiles.size()));
  }

  double acc = 0.0;
  for (std::size_t i = 0; i < ref_tiles.size(); ++i) {
    const Tensor ref_w = apply_zca(zca, ref_tiles[i]);
    const Tensor dist_w = apply_zca(zca, dist_tiles[i]);

    Tensor proj_ref, proj_dist;
    if (cfg.gradient_anchor == GradientAnchor::PerImage) {
      proj_ref = detail::decoder_weight_gradient(model, ref_w,
                                                 cfg.gradient_source);
      proj_dist = detail::decoder_weight_gradient(model, dist_w,
                                                  cfg.gradient_source);
    } else {
      IqaConfig patch_cfg = cfg;
      try {
        proj_ref = gradient_projection(model, dist_w, ref_w, patch_cfg);
      } catch (const DegenerateProjectionError&) {
        // A perfectly reconstructed anchor starves the reconstruction-only
        // gradient; the total-loss gradient still carries the decay term.
        if (patch_cfg.gradient_source == GradientSource::DecoderTotal) throw;
        patch_cfg.gradient_source = GradientSource::DecoderTotal;
        proj_ref = gradient_projection(model, dist_w, ref_w, patch_cfg);
      }
      proj_dist = gradient_projection(model, dist_w, dist_w, patch_cfg);
    }
    acc += spearman(proj_ref.data(), proj_dist.data());
  }
  return acc / static_cast<double>(ref_tiles.size());
}

}  // namespace gradfeat
