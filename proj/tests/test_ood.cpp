#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "gradfeat/core/rng.hpp"
#include "gradfeat/ood/classifier.hpp"
#include "gradfeat/ood/experiment.hpp"
#include "gradfeat/ood/features.hpp"
#include "gradfeat/synthetic.hpp"

using namespace gradfeat;

namespace {

VaeModel feature_model(std::uint64_t seed) {
  VaeConfig cfg;
  cfg.input_dim = 27;
  cfg.hidden_dim = 5;
  cfg.latent_dim = 2;
  return VaeModel::init_random(cfg, seed);
}

}  // namespace

TEST_CASE("procedural images are seeded, bounded, and distinct", "[synthetic]") {
  const Tensor a = synthetic_image(20, 24, 3, 9);
  const Tensor b = synthetic_image(20, 24, 3, 9);
  const Tensor c = synthetic_image(20, 24, 3, 10);
  REQUIRE(a.dim(0) == 20);
  REQUIRE(a.dim(1) == 24);
  REQUIRE(a.dim(2) == 3);
  double diff = 0.0, spread = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i] == b[i]);
    REQUIRE(a[i] >= 0.0);
    REQUIRE(a[i] <= 1.0);
    diff += std::abs(a[i] - c[i]);
    spread += std::abs(a[i] - a[0]);
  }
  REQUIRE(diff > 0.0);
  REQUIRE(spread > 0.0);

  const std::vector<Tensor> set = synthetic_image_set(5, 8, 8, 1, 3);
  REQUIRE(set.size() == 5);
  double pair_diff = 0.0;
  for (std::size_t i = 0; i < set[0].size(); ++i) {
    pair_diff += std::abs(set[0][i] - set[1][i]);
  }
  REQUIRE(pair_diff > 0.0);
}

TEST_CASE("feature vectors have the advertised lengths", "[ood]") {
  const VaeModel m = feature_model(7);
  const Tensor x = flatten_image(synthetic_image(3, 3, 3, 8));
  SeededRng rng(1);
  REQUIRE(extract_features(m, x, FeatureKind::Activation, rng).size() == 2);
  REQUIRE(extract_features(m, x, FeatureKind::ReconDecoderGrad, rng).size() ==
          27 * 2 + 27);
  REQUIRE(extract_features(m, x, FeatureKind::RegEncoderGrad, rng).size() ==
          2 * (2 * 5 + 2));
  REQUIRE(extract_features(m, x, FeatureKind::BothGrads, rng).size() ==
          27 * 2 + 27 + 2 * (2 * 5 + 2));
}

TEST_CASE("combined features are the two blocks back to back", "[ood]") {
  const VaeModel m = feature_model(11);
  const Tensor x = flatten_image(synthetic_image(3, 3, 3, 12));
  SeededRng r1(40), r2(40), r3(40);
  const Tensor both = extract_features(m, x, FeatureKind::BothGrads, r1);
  const Tensor recon = extract_features(m, x, FeatureKind::ReconDecoderGrad, r2);
  const Tensor reg = extract_features(m, x, FeatureKind::RegEncoderGrad, r3);
  for (std::size_t i = 0; i < recon.size(); ++i) REQUIRE(both[i] == recon[i]);
  for (std::size_t i = 0; i < reg.size(); ++i) {
    REQUIRE(both[recon.size() + i] == reg[i]);
  }
}

TEST_CASE("mean activations ignore the noise stream", "[ood]") {
  const VaeModel m = feature_model(13);
  const Tensor x = flatten_image(synthetic_image(3, 3, 3, 14));
  SeededRng r1(1), r2(999);
  const Tensor a = extract_features(m, x, FeatureKind::Activation, r1);
  const Tensor b = extract_features(m, x, FeatureKind::Activation, r2);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);

  FeatureOptions opt;
  opt.kind = FeatureKind::Activation;
  opt.sampled_activation = true;
  SeededRng r3(1), r4(999);
  const Tensor s1 = extract_features(m, x, opt, r3);
  const Tensor s2 = extract_features(m, x, opt, r4);
  double diff = 0.0;
  for (std::size_t i = 0; i < s1.size(); ++i) diff += std::abs(s1[i] - s2[i]);
  REQUIRE(diff > 0.0);
}

TEST_CASE("gradient features are reproducible under a fixed stream", "[ood]") {
  const VaeModel m = feature_model(15);
  const Tensor x = flatten_image(synthetic_image(3, 3, 3, 16));
  SeededRng r1(77), r2(77);
  const Tensor a = extract_features(m, x, FeatureKind::BothGrads, r1);
  const Tensor b = extract_features(m, x, FeatureKind::BothGrads, r2);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}

TEST_CASE("distorted inputs move the feature vector", "[ood]") {
  const VaeModel m = feature_model(17);
  const Tensor img = synthetic_image(3, 3, 3, 18);
  Tensor shifted = img;
  for (double& v : shifted.data()) v = std::clamp(v + 0.2, 0.0, 1.0);
  SeededRng r1(5), r2(5);
  const Tensor a =
      extract_features(m, flatten_image(img), FeatureKind::BothGrads, r1);
  const Tensor b =
      extract_features(m, flatten_image(shifted), FeatureKind::BothGrads, r2);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += std::abs(a[i] - b[i]);
  REQUIRE(diff > 0.0);
}

namespace {

std::vector<Tensor> blob(SeededRng& rng, std::size_t n, double center) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < n; ++i) {
    Tensor t({3});
    for (std::size_t j = 0; j < 3; ++j) {
      t[j] = center + 0.1 * rng.next_gaussian();
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST_CASE("well-separated blobs are classified perfectly", "[ood]") {
  SeededRng rng(31);
  std::vector<Tensor> features = blob(rng, 40, -2.0);
  std::vector<Tensor> outs = blob(rng, 40, 2.0);
  features.insert(features.end(), outs.begin(), outs.end());
  std::vector<OodLabel> labels(40, OodLabel::In);
  labels.resize(80, OodLabel::Out);
  const LinearClassifier clf = train_classifier(features, labels);
  REQUIRE(evaluate_accuracy(clf, features, labels) == 1.0);
  REQUIRE(classify(clf, features.front()) == OodLabel::In);
  REQUIRE(classify(clf, features.back()) == OodLabel::Out);
}

TEST_CASE("random labels train to chance level", "[ood]") {
  SeededRng rng(32);
  std::vector<Tensor> features;
  std::vector<OodLabel> labels;
  std::size_t n_out = 0;
  for (int i = 0; i < 400; ++i) {
    Tensor t({2});
    t[0] = rng.next_gaussian();
    t[1] = rng.next_gaussian();
    features.push_back(t);
    const bool out = rng.next_uniform() < 0.5;
    labels.push_back(out ? OodLabel::Out : OodLabel::In);
    n_out += out ? 1 : 0;
  }
  REQUIRE(n_out > 150);
  REQUIRE(n_out < 250);
  const LinearClassifier clf = train_classifier(features, labels);
  const double acc = evaluate_accuracy(clf, features, labels);
  REQUIRE(acc > 0.35);
  REQUIRE(acc < 0.65);
}

TEST_CASE("identical features on balanced labels score exactly half", "[ood]") {
  std::vector<Tensor> features(10, Tensor::full({4}, 0.3));
  std::vector<OodLabel> labels(5, OodLabel::In);
  labels.resize(10, OodLabel::Out);
  const LinearClassifier clf = train_classifier(features, labels);
  REQUIRE(evaluate_accuracy(clf, features, labels) == 0.5);
}

TEST_CASE("an untrained classifier scores exactly half on balanced labels", "[ood]") {
  LinearClassifier clf;
  clf.weights = Tensor({3});
  clf.bias = 0.0;
  clf.feature_mean = Tensor({3});
  clf.feature_std = Tensor::full({3}, 1.0);
  SeededRng rng(33);
  std::vector<Tensor> features;
  std::vector<OodLabel> labels;
  for (int i = 0; i < 12; ++i) {
    features.push_back(sample_gaussian(rng, {3}));
    labels.push_back(i % 2 == 0 ? OodLabel::In : OodLabel::Out);
  }
  REQUIRE(evaluate_accuracy(clf, features, labels) == 0.5);
}

TEST_CASE("duplicated feature dimensions do not change the labels", "[ood]") {
  SeededRng rng(34);
  std::vector<Tensor> features = blob(rng, 30, -1.5);
  std::vector<Tensor> outs = blob(rng, 30, 1.5);
  features.insert(features.end(), outs.begin(), outs.end());
  std::vector<OodLabel> labels(30, OodLabel::In);
  labels.resize(60, OodLabel::Out);

  std::vector<Tensor> doubled;
  for (const Tensor& f : features) {
    Tensor t({6});
    for (std::size_t i = 0; i < 3; ++i) {
      t[i] = f[i];
      t[i + 3] = f[i];
    }
    doubled.push_back(t);
  }
  const LinearClassifier base = train_classifier(features, labels);
  const LinearClassifier wide = train_classifier(doubled, labels);
  for (std::size_t i = 0; i < features.size(); ++i) {
    REQUIRE(classify(base, features[i]) == classify(wide, doubled[i]));
  }
}

TEST_CASE("classifier training validates its inputs", "[ood]") {
  std::vector<Tensor> features(4, Tensor::full({2}, 1.0));
  std::vector<OodLabel> one_class(4, OodLabel::In);
  REQUIRE_THROWS_AS(train_classifier(features, one_class), DomainError);
  REQUIRE_THROWS_AS(train_classifier({}, {}), DomainError);
  std::vector<OodLabel> short_labels(3, OodLabel::In);
  REQUIRE_THROWS_AS(train_classifier(features, short_labels), ShapeError);

  std::vector<OodLabel> labels{OodLabel::In, OodLabel::In, OodLabel::Out,
                               OodLabel::Out};
  const LinearClassifier clf = train_classifier(features, labels);
  REQUIRE_THROWS_AS(decision_value(clf, Tensor({3})), ShapeError);
  REQUIRE_THROWS_AS(evaluate_accuracy(clf, {}, {}), DomainError);
}

TEST_CASE("the challenge table runs end to end and reproduces", "[ood]") {
  VaeConfig vcfg;
  vcfg.input_dim = 64;
  vcfg.hidden_dim = 12;
  vcfg.latent_dim = 4;
  const VaeModel m = VaeModel::init_random(vcfg, 51);

  OodExperimentConfig cfg;
  cfg.input_h = 8;
  cfg.input_w = 8;
  cfg.input_c = 1;
  cfg.challenge_types = {DistortionKind::GaussianNoise,
                         DistortionKind::GaussianBlur};
  cfg.seed = 3;
  const OodDataset data = make_synthetic_ood_dataset(12, 8, 20, 20, 1, 99);

  const OodTable t1 = run_experiment(m, data, cfg);
  REQUIRE(t1.accuracy.dim(0) == 4);
  REQUIRE(t1.accuracy.dim(1) == 2);
  for (std::size_t i = 0; i < t1.accuracy.size(); ++i) {
    REQUIRE(t1.accuracy[i] >= 0.0);
    REQUIRE(t1.accuracy[i] <= 1.0);
  }
  const OodTable t2 = run_experiment(m, data, cfg);
  const std::string csv1 = ood_table_csv(t1);
  const std::string csv2 = ood_table_csv(t2);
  REQUIRE(csv1 == csv2);
  REQUIRE(csv1.rfind("feature_kind,NO,LB\n", 0) == 0);
  REQUIRE(csv1.find("both_grads") != std::string::npos);

  OodExperimentConfig bad = cfg;
  bad.input_w = 9;
  REQUIRE_THROWS_AS(run_experiment(m, data, bad), ShapeError);
  REQUIRE_THROWS_AS(run_experiment(m, OodDataset{}, cfg), DomainError);
}

TEST_CASE("capping the classifier rows still trains", "[ood]") {
  VaeConfig vcfg;
  vcfg.input_dim = 48;
  vcfg.hidden_dim = 8;
  vcfg.latent_dim = 3;
  const VaeModel m = VaeModel::init_random(vcfg, 52);
  OodExperimentConfig cfg;
  cfg.input_h = 4;
  cfg.input_w = 4;
  cfg.input_c = 3;
  cfg.feature_kinds = {FeatureKind::Activation};
  cfg.challenge_types = {DistortionKind::GaussianNoise};
  cfg.classifier_train_count = 5;
  const OodDataset data = make_synthetic_ood_dataset(20, 6, 16, 16, 3, 7);
  const OodTable t = run_experiment(m, data, cfg);
  REQUIRE(t.accuracy.size() == 1);
}
