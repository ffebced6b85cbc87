#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/format.hpp"
#include "gradfeat/core/rng.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/distort/distort.hpp"
#include "gradfeat/models/vae.hpp"
#include "gradfeat/ood/classifier.hpp"
#include "gradfeat/ood/features.hpp"
#include "gradfeat/synthetic.hpp"
#include "gradfeat/train/resize.hpp"

namespace gradfeat {

// Challenge-detection experiment: one classifier per feature kind, trained
// to separate clean from Gaussian-blurred training images, then asked to
// flag every challenge type it has never seen. Mirrors the table layout of
// the evaluation protocol: rows are feature kinds, columns challenge types.

struct OodExperimentConfig {
  std::vector<FeatureKind> feature_kinds{
      FeatureKind::Activation, FeatureKind::ReconDecoderGrad,
      FeatureKind::RegEncoderGrad, FeatureKind::BothGrads};
  std::vector<DistortionKind> challenge_types{kAllDistortionKinds.begin(),
                                              kAllDistortionKinds.end()};
  int eval_level = 5;
  int train_blur_level = 5;
  // Model input geometry; full-size images are bilinearly resized to this.
  std::size_t input_h = 16;
  std::size_t input_w = 16;
  std::size_t input_c = 3;
  // Images fed to the classifier (pairs of clean/blur rows); 0 means all
  // training images. Capping keeps the 5000-iteration descent affordable.
  std::size_t classifier_train_count = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (feature_kinds.empty()) throw DomainError("no feature kinds selected");
    if (challenge_types.empty()) throw DomainError("no challenge types selected");
    if (eval_level < 1 || eval_level > 5) {
      throw DomainError("eval_level must lie in 1..5");
    }
    if (train_blur_level < 1 || train_blur_level > 5) {
      throw DomainError("train_blur_level must lie in 1..5");
    }
    if (input_h == 0 || input_w == 0 || input_c == 0) {
      throw DomainError("input geometry must be >= 1");
    }
  }
};

struct OodDataset {
  std::vector<Tensor> train_images;  // clean, [H x W x C] in [0,1]
  std::vector<Tensor> test_images;   // clean, held out
};

struct OodTable {
  std::vector<FeatureKind> feature_kinds;
  std::vector<DistortionKind> challenge_types;
  Tensor accuracy;  // [feature kinds x challenge types]
};

inline OodDataset make_synthetic_ood_dataset(std::size_t train_count,
                                             std::size_t test_count,
                                             std::size_t h, std::size_t w,
                                             std::size_t c,
                                             std::uint64_t seed) {
  OodDataset data;
  data.train_images = synthetic_shape_image_set(train_count, h, w, c,
                                                SeededRng::derive(seed, 1));
  data.test_images = synthetic_shape_image_set(test_count, h, w, c,
                                               SeededRng::derive(seed, 2));
  return data;
}

namespace detail {

inline Tensor prep_input(const Tensor& image, const OodExperimentConfig& cfg) {
  return flatten_image(resize_bilinear(image, cfg.input_h, cfg.input_w));
}

// Stream ids keep every (phase, image) draw independent and reproducible.
inline std::uint64_t phase_stream(std::uint64_t seed, std::uint64_t phase,
                                  std::uint64_t index) {
  return SeededRng::derive(SeededRng::derive(seed, phase), index);
}

}  // namespace detail

inline OodTable run_experiment(const VaeModel& model, const OodDataset& data,
                               const OodExperimentConfig& cfg) {
  cfg.validate();
  if (data.train_images.empty() || data.test_images.empty()) {
    throw DomainError("ood experiment: empty train or test split");
  }
  if (model.input_dim() != cfg.input_h * cfg.input_w * cfg.input_c) {
    throw ShapeError("ood experiment: model input dim " +
                     std::to_string(model.input_dim()) +
                     " does not match configured geometry");
  }

  const std::size_t n_train =
      cfg.classifier_train_count == 0
          ? data.train_images.size()
          : std::min(cfg.classifier_train_count, data.train_images.size());
  const std::size_t n_test = data.test_images.size();

  // Model inputs are prepared once; feature kinds reuse them.
  std::vector<Tensor> train_clean, train_blur, test_clean;
  train_clean.reserve(n_train);
  train_blur.reserve(n_train);
  test_clean.reserve(n_test);
  for (std::size_t i = 0; i < n_train; ++i) {
    train_clean.push_back(detail::prep_input(data.train_images[i], cfg));
    DistortionSpec blur{DistortionKind::GaussianBlur, cfg.train_blur_level,
                        detail::phase_stream(cfg.seed, 100, i)};
    train_blur.push_back(
        detail::prep_input(apply_distortion(data.train_images[i], blur), cfg));
  }
  for (std::size_t i = 0; i < n_test; ++i) {
    test_clean.push_back(detail::prep_input(data.test_images[i], cfg));
  }
  std::vector<std::vector<Tensor>> test_challenge(cfg.challenge_types.size());
  for (std::size_t c = 0; c < cfg.challenge_types.size(); ++c) {
    test_challenge[c].reserve(n_test);
    for (std::size_t i = 0; i < n_test; ++i) {
      DistortionSpec spec{cfg.challenge_types[c], cfg.eval_level,
                          detail::phase_stream(cfg.seed, 200 + c, i)};
      test_challenge[c].push_back(
          detail::prep_input(apply_distortion(data.test_images[i], spec), cfg));
    }
  }

  OodTable table;
  table.feature_kinds = cfg.feature_kinds;
  table.challenge_types = cfg.challenge_types;
  table.accuracy =
      Tensor({cfg.feature_kinds.size(), cfg.challenge_types.size()});

  for (std::size_t k = 0; k < cfg.feature_kinds.size(); ++k) {
    const FeatureKind kind = cfg.feature_kinds[k];
    auto features_of = [&](const std::vector<Tensor>& inputs,
                           std::uint64_t phase) {
      std::vector<Tensor> out;
      out.reserve(inputs.size());
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        SeededRng rng(detail::phase_stream(cfg.seed, phase, i));
        out.push_back(extract_features(model, inputs[i], kind, rng));
      }
      return out;
    };

    std::vector<Tensor> train_features = features_of(train_clean, 0);
    {
      std::vector<Tensor> blur_features = features_of(train_blur, 1);
      for (Tensor& f : blur_features) train_features.push_back(std::move(f));
    }
    std::vector<OodLabel> train_labels(n_train, OodLabel::In);
    train_labels.resize(2 * n_train, OodLabel::Out);
    const LinearClassifier clf =
        train_classifier(train_features, train_labels, cfg.seed);

    const std::vector<Tensor> clean_features = features_of(test_clean, 2);
    for (std::size_t c = 0; c < cfg.challenge_types.size(); ++c) {
      std::vector<Tensor> eval_features = clean_features;
      {
        std::vector<Tensor> chall = features_of(test_challenge[c], 3 + c);
        for (Tensor& f : chall) eval_features.push_back(std::move(f));
      }
      std::vector<OodLabel> eval_labels(n_test, OodLabel::In);
      eval_labels.resize(2 * n_test, OodLabel::Out);
      table.accuracy(k, c) = evaluate_accuracy(clf, eval_features, eval_labels);
    }
  }
  return table;
}

inline std::string ood_table_csv(const OodTable& table) {
  std::string out = "feature_kind";
  for (DistortionKind k : table.challenge_types) {
    out += ",";
    out += distortion_kind_code(k);
  }
  out += "\n";
  for (std::size_t r = 0; r < table.feature_kinds.size(); ++r) {
    out += feature_kind_name(table.feature_kinds[r]);
    for (std::size_t c = 0; c < table.challenge_types.size(); ++c) {
      out += ",";
      out += format_double(table.accuracy(r, c));
    }
    out += "\n";
  }
  return out;
}

}  // namespace gradfeat
