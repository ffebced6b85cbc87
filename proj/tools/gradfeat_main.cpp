// Command-line front end: training, gradient checking, distortion synthesis,
// quality scoring, and the challenge-detection table. Every run writes a
// run_record.json with the resolved settings and input hashes so it can be
// replayed exactly.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "gradfeat/gradfeat.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace gradfeat;

namespace {

struct CommandContext {
  std::string name;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_dir = ".";
  CLI::Option* seed_opt = nullptr;
  nlohmann::json config = nlohmann::json::object();
  ordered_json resolved = ordered_json::object();
  std::map<std::string, std::string> input_hashes;
  std::vector<std::string> outputs;

  void load_config(const std::string& command_name) {
    name = command_name;
    if (!config_path.empty()) {
      try {
        config = nlohmann::json::parse(read_file(config_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("config " + config_path + ": " + e.what());
      }
      if (!config.is_object()) {
        throw DomainError("config " + config_path + " must be a JSON object");
      }
    }
    seed = setting<std::uint64_t>(seed_opt, "seed", seed);
  }

  // Precedence: explicit flag > config file > default. Every consulted key
  // lands in `resolved`, which doubles as the config-key whitelist.
  template <typename T>
  T setting(const CLI::Option* opt, const std::string& key, T value) {
    if ((opt == nullptr || opt->count() == 0) && config.contains(key)) {
      try {
        value = config.at(key).get<T>();
      } catch (const nlohmann::json::exception& e) {
        throw DomainError("config key '" + key + "': " + e.what());
      }
    }
    resolved[key] = value;
    return value;
  }

  void reject_unknown_config_keys() const {
    for (const auto& item : config.items()) {
      if (!resolved.contains(item.key())) {
        throw DomainError("config key '" + item.key() + "' is not used by " +
                          name);
      }
    }
  }

  void hash_input(const std::string& path) {
    const std::string bytes = read_file(path);
    input_hashes[path] = hex64(fnv1a64(bytes.data(), bytes.size()));
  }

  std::string out_path(const std::string& filename) const {
    return (fs::path(out_dir) / filename).string();
  }

  void write_output(const std::string& filename, const std::string& bytes) {
    fs::create_directories(out_dir);
    write_file_atomic(out_path(filename), bytes);
    outputs.push_back(filename);
  }

  void write_run_record() {
    ordered_json rec;
    rec["command"] = name;
    rec["version"] = std::string(kProjectName) + " " + kVersion;
    rec["seed"] = seed;
    rec["settings"] = resolved;
    ordered_json inputs = ordered_json::object();
    for (const auto& [path, hash] : input_hashes) inputs[path] = hash;
    rec["inputs"] = inputs;
    rec["outputs"] = outputs;
    fs::create_directories(out_dir);
    write_file_atomic(out_path("run_record.json"), rec.dump(2) + "\n");
  }
};

void add_common_flags(CLI::App* cmd, CommandContext& ctx) {
  ctx.seed_opt = cmd->add_option("--seed", ctx.seed, "root seed for all randomness");
  cmd->add_option("--config", ctx.config_path, "JSON file with settings");
  cmd->add_option("--out", ctx.out_dir, "output directory");
}

// Scores print with a decimal point even when integral, so an identity
// comparison reads "1.0" rather than "1".
std::string format_score(double v) {
  std::string s = format_double(v);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
    s += ".0";
  }
  return s;
}

ordered_json loss_json(const LossBreakdown& l) {
  ordered_json j;
  j["recon"] = l.recon;
  j["reg"] = l.reg;
  j["total"] = l.total;
  return j;
}

ordered_json report_json(const TrainReport& r) {
  ordered_json j;
  j["epochs"] = r.epoch_loss.size();
  ordered_json arr = ordered_json::array();
  for (const LossBreakdown& l : r.epoch_loss) arr.push_back(loss_json(l));
  j["epoch_loss"] = arr;
  j["final_checksum"] = hex64(r.final_checksum);
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

std::vector<Tensor> manifest_images(CommandContext& ctx,
                                    const std::string& manifest_path,
                                    const std::string& role) {
  const DatasetManifest m = load_manifest(manifest_path);
  ctx.hash_input(manifest_path);
  std::vector<Tensor> out;
  for (const ManifestRecord& r : m.with_role(role)) {
    const std::string p = m.resolve(r.image_path);
    ctx.hash_input(p);
    out.push_back(load_image(p));
  }
  if (out.empty()) {
    throw DomainError("manifest " + manifest_path + " has no '" + role +
                      "' records");
  }
  return out;
}

struct TrainDataFlags {
  std::string manifest_path;
  bool synthetic = false;
};

std::vector<Tensor> training_images(CommandContext& ctx,
                                    const TrainDataFlags& flags,
                                    std::size_t image_count,
                                    std::size_t image_size,
                                    std::size_t channels) {
  if (flags.synthetic == flags.manifest_path.empty()) {
    // exactly one source: synthetic without a manifest, or a manifest alone
    if (flags.synthetic) {
      return synthetic_image_set(image_count, image_size, image_size, channels,
                                 SeededRng::derive(ctx.seed, 11));
    }
    return manifest_images(ctx, flags.manifest_path, "train");
  }
  throw DomainError("pass exactly one of --manifest or --synthetic");
}

int run_train_sae(CommandContext& ctx, const TrainDataFlags& flags) {
  const auto image_count = ctx.setting<std::size_t>(nullptr, "image_count", 5);
  const auto image_size = ctx.setting<std::size_t>(nullptr, "image_size", 64);
  const auto channels = ctx.setting<std::size_t>(nullptr, "channels", 3);
  const auto patch_size = ctx.setting<std::size_t>(nullptr, "patch_size", 8);
  const auto patches_per_image =
      ctx.setting<std::size_t>(nullptr, "patches_per_image", 480);
  const auto latent_dim = ctx.setting<std::size_t>(nullptr, "latent_dim", 64);
  const auto beta = ctx.setting<double>(nullptr, "beta", 3.0);
  const auto lambda = ctx.setting<double>(nullptr, "lambda", 3e-3);
  const auto zca_epsilon = ctx.setting<double>(nullptr, "zca_epsilon", 0.1);
  const auto learning_rate =
      ctx.setting<double>(nullptr, "learning_rate", 1e-3);
  const auto epochs = ctx.setting<std::size_t>(nullptr, "epochs", 200);
  const auto batch_size = ctx.setting<std::size_t>(nullptr, "batch_size", 32);
  ctx.reject_unknown_config_keys();

  const std::vector<Tensor> images =
      training_images(ctx, flags, image_count, image_size, channels);

  SeededRng patch_rng(SeededRng::derive(ctx.seed, 12));
  std::vector<Tensor> patches;
  for (const Tensor& img : images) {
    const std::vector<Tensor> p =
        extract_patches(img, patch_size, patches_per_image, patch_rng);
    patches.insert(patches.end(), p.begin(), p.end());
  }
  const ZcaTransform zca = fit_zca(patches, zca_epsilon);
  std::vector<Tensor> white;
  white.reserve(patches.size());
  for (const Tensor& p : patches) white.push_back(apply_zca(zca, p));

  SaeConfig scfg;
  scfg.input_dim = patches.front().size();
  scfg.latent_dim = latent_dim;
  scfg.beta = beta;
  scfg.lambda = lambda;
  SaeModel model = SaeModel::init_random(scfg, SeededRng::derive(ctx.seed, 13));

  OptimizerConfig ocfg;
  ocfg.learning_rate = learning_rate;
  ocfg.epochs = epochs;
  ocfg.batch_size = batch_size;
  ocfg.seed = SeededRng::derive(ctx.seed, 14);
  const TrainReport rep = train(model, white, ocfg);

  ctx.write_output("checkpoint.json", encode_checkpoint(model, &zca));
  ctx.write_output("train_report.json", report_json(rep).dump(2) + "\n");
  ctx.write_run_record();
  std::cout << "trained on " << white.size() << " patches, final loss "
            << format_double(rep.epoch_loss.back().total) << "\n";
  return 0;
}

int run_train_vae(CommandContext& ctx, const TrainDataFlags& flags) {
  const auto image_count = ctx.setting<std::size_t>(nullptr, "image_count", 60);
  const auto image_size = ctx.setting<std::size_t>(nullptr, "image_size", 32);
  const auto input_h = ctx.setting<std::size_t>(nullptr, "input_h", 16);
  const auto input_w = ctx.setting<std::size_t>(nullptr, "input_w", 16);
  const auto input_c = ctx.setting<std::size_t>(nullptr, "input_c", 3);
  const auto hidden_dim = ctx.setting<std::size_t>(nullptr, "hidden_dim", 96);
  const auto latent_dim = ctx.setting<std::size_t>(nullptr, "latent_dim", 12);
  const auto learning_rate =
      ctx.setting<double>(nullptr, "learning_rate", 1e-3);
  const auto epochs = ctx.setting<std::size_t>(nullptr, "epochs", 40);
  const auto batch_size = ctx.setting<std::size_t>(nullptr, "batch_size", 32);
  ctx.reject_unknown_config_keys();

  const std::vector<Tensor> images =
      training_images(ctx, flags, image_count, image_size, input_c);
  std::vector<Tensor> data;
  data.reserve(images.size());
  for (const Tensor& img : images) {
    if (img.dim(2) != input_c) {
      throw DomainError("image has " + std::to_string(img.dim(2)) +
                        " channels, expected " + std::to_string(input_c));
    }
    data.push_back(flatten_image(resize_bilinear(img, input_h, input_w)));
  }

  VaeConfig vcfg;
  vcfg.input_dim = input_h * input_w * input_c;
  vcfg.hidden_dim = hidden_dim;
  vcfg.latent_dim = latent_dim;
  VaeModel model = VaeModel::init_random(vcfg, SeededRng::derive(ctx.seed, 13));

  OptimizerConfig ocfg;
  ocfg.learning_rate = learning_rate;
  ocfg.epochs = epochs;
  ocfg.batch_size = batch_size;
  ocfg.seed = SeededRng::derive(ctx.seed, 14);
  const TrainReport rep = train(model, data, ocfg);

  ctx.write_output("checkpoint.json", encode_checkpoint(model));
  ctx.write_output("train_report.json", report_json(rep).dump(2) + "\n");
  ctx.write_run_record();
  std::cout << "trained on " << data.size() << " images, final loss "
            << format_double(rep.epoch_loss.back().total) << "\n";
  return 0;
}

int run_gradcheck(CommandContext& ctx, const std::string& checkpoint_path) {
  const auto epsilon = ctx.setting<double>(nullptr, "epsilon", 1e-5);
  const auto max_params = ctx.setting<std::size_t>(nullptr, "max_params", 200);
  const auto threshold = ctx.setting<double>(nullptr, "threshold", 1e-4);
  ctx.reject_unknown_config_keys();

  ctx.hash_input(checkpoint_path);
  const LoadedCheckpoint lc = load_checkpoint(checkpoint_path);

  FiniteDiffOptions opt;
  opt.epsilon = epsilon;
  opt.max_params = max_params;
  opt.subsample_seed = ctx.seed;

  ordered_json terms = ordered_json::array();
  bool ok = true;
  for (LossTerm term : {LossTerm::Reconstruction, LossTerm::Regularization,
                        LossTerm::Total}) {
    opt.term = term;
    FiniteDiffReport rep;
    if (lc.family == ModelFamily::Sae) {
      SeededRng probe_rng(SeededRng::derive(ctx.seed, 22));
      const Tensor x = sample_gaussian(probe_rng, {lc.sae->input_dim()});
      rep = finite_diff_check(*lc.sae, x, opt);
    } else {
      SeededRng probe_rng(SeededRng::derive(ctx.seed, 22));
      const Tensor x =
          sample_uniform(probe_rng, {lc.vae->input_dim()}, 0.0, 1.0);
      opt.noise_seed = SeededRng::derive(ctx.seed, 21);
      rep = finite_diff_check(*lc.vae, x, opt);
    }
    ordered_json j;
    j["term"] = loss_term_name(rep.term);
    j["epsilon"] = rep.epsilon;
    j["checked"] = rep.checked;
    j["max_rel_error"] = rep.max_rel_error;
    j["worst_parameter"] = rep.worst.parameter;
    j["worst_analytic"] = rep.worst.analytic;
    j["worst_numeric"] = rep.worst.numeric;
    terms.push_back(j);
    std::cout << loss_term_name(rep.term) << ": max_rel_error "
              << format_double(rep.max_rel_error) << " over " << rep.checked
              << " parameters\n";
    ok = ok && rep.max_rel_error < threshold;
  }
  ordered_json doc;
  doc["model_family"] = family_name(lc.family);
  doc["threshold"] = threshold;
  doc["terms"] = terms;
  doc["passed"] = ok;
  ctx.write_output("gradcheck.json", doc.dump(2) + "\n");
  ctx.write_run_record();
  std::cout << (ok ? "gradcheck passed" : "gradcheck FAILED") << "\n";
  return ok ? 0 : 1;
}

int run_distort(CommandContext& ctx, const std::string& input_path,
                const std::string& kind_name, int level) {
  ctx.resolved["kind"] = kind_name;
  ctx.resolved["level"] = level;
  ctx.reject_unknown_config_keys();

  DistortionSpec spec;
  spec.kind = distortion_kind_from_name(kind_name);
  spec.level = level;

  std::vector<fs::path> files;
  if (fs::is_directory(input_path)) {
    for (const auto& entry : fs::directory_iterator(input_path)) {
      const std::string ext = entry.path().extension().string();
      if (entry.is_regular_file() && (ext == ".ppm" || ext == ".pgm")) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw DomainError("no .ppm/.pgm files in " + input_path);
    }
  } else {
    files.push_back(input_path);
  }

  for (const fs::path& f : files) {
    ctx.hash_input(f.string());
    const Tensor img = load_image(f.string());
    const std::string name = f.filename().string();
    // Per-file stream tied to the filename, so adding files never reshuffles
    // the noise of existing ones.
    spec.seed = SeededRng::derive(ctx.seed, fnv1a64(name.data(), name.size()));
    const Tensor out = apply_distortion(img, spec);
    fs::create_directories(ctx.out_dir);
    save_image(out, ctx.out_path(name));
    ctx.outputs.push_back(name);
  }
  ctx.write_run_record();
  std::cout << "distorted " << files.size() << " image(s)\n";
  return 0;
}

IqaConfig iqa_config_from(CommandContext& ctx) {
  IqaConfig cfg;
  cfg.patch_size = ctx.setting<std::size_t>(nullptr, "patch_size", 8);
  cfg.patch_stride = ctx.setting<std::size_t>(nullptr, "patch_stride", 8);
  const std::string source =
      ctx.setting<std::string>(nullptr, "gradient_source", "total");
  if (source == "total") {
    cfg.gradient_source = GradientSource::DecoderTotal;
  } else if (source == "recon") {
    cfg.gradient_source = GradientSource::DecoderRecon;
  } else {
    throw DomainError("gradient_source must be 'total' or 'recon'");
  }
  const std::string anchor =
      ctx.setting<std::string>(nullptr, "gradient_anchor", "distorted");
  if (anchor == "distorted") {
    cfg.gradient_anchor = GradientAnchor::Distorted;
  } else if (anchor == "per_image") {
    cfg.gradient_anchor = GradientAnchor::PerImage;
  } else {
    throw DomainError("gradient_anchor must be 'distorted' or 'per_image'");
  }
  cfg.invert_nonlinearity =
      ctx.setting<bool>(nullptr, "invert_nonlinearity", true);
  return cfg;
}

struct SaeWithZca {
  SaeModel model;
  ZcaTransform zca;
};

SaeWithZca load_sae_checkpoint(CommandContext& ctx, const std::string& path) {
  ctx.hash_input(path);
  LoadedCheckpoint lc = load_checkpoint(path);
  if (lc.family != ModelFamily::Sae) {
    throw DomainError("checkpoint " + path + " does not hold the patch model");
  }
  if (!lc.zca.has_value()) {
    throw DomainError("checkpoint " + path +
                      " lacks the whitening transform required for scoring");
  }
  return {std::move(*lc.sae), std::move(*lc.zca)};
}

int run_iqa_score(CommandContext& ctx, const std::string& checkpoint_path,
                  const std::string& ref_path, const std::string& dist_path) {
  const IqaConfig cfg = iqa_config_from(ctx);
  ctx.reject_unknown_config_keys();
  const SaeWithZca sz = load_sae_checkpoint(ctx, checkpoint_path);
  ctx.hash_input(ref_path);
  ctx.hash_input(dist_path);
  const Tensor ref = load_image(ref_path);
  const Tensor dist = load_image(dist_path);
  const double score = iqa_score(sz.model, sz.zca, ref, dist, cfg);
  ordered_json doc;
  doc["score"] = score;
  ctx.write_output("iqa_score.json", doc.dump(2) + "\n");
  ctx.write_run_record();
  std::cout << format_score(score) << "\n";
  return 0;
}

int run_iqa_eval(CommandContext& ctx, const std::string& checkpoint_path,
                 const std::string& manifest_path) {
  const IqaConfig cfg = iqa_config_from(ctx);
  ctx.reject_unknown_config_keys();
  const SaeWithZca sz = load_sae_checkpoint(ctx, checkpoint_path);
  const DatasetManifest manifest = load_manifest(manifest_path);
  ctx.hash_input(manifest_path);
  for (const ManifestRecord& r : manifest.with_role("test")) {
    if (!r.is_iqa()) continue;
    ctx.hash_input(manifest.resolve(r.image_path));
    ctx.hash_input(manifest.resolve(*r.reference_path));
  }

  const EvalResult res = iqa_evaluate(sz.model, sz.zca, manifest, cfg);
  ordered_json doc;
  doc["plcc"] = res.metrics.plcc;
  doc["srcc"] = res.metrics.srcc;
  doc["krcc"] = res.metrics.krcc;
  doc["rmse"] = res.metrics.rmse;
  doc["outlier_ratio"] = res.metrics.outlier_ratio;
  ordered_json fit;
  fit["a"] = res.fit.a;
  fit["b"] = res.fit.b;
  fit["c"] = res.fit.c;
  fit["d"] = res.fit.d;
  fit["affine_fallback"] = res.fit.affine_fallback;
  fit["residual"] = res.fit.residual;
  doc["fit"] = fit;
  ctx.write_output("eval_metrics.json", doc.dump(2) + "\n");
  ctx.write_output("eval_rows.csv", eval_rows_csv(res.rows));
  ctx.write_run_record();
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int run_ood(CommandContext& ctx, const std::string& checkpoint_path,
            const std::string& manifest_path, bool synthetic) {
  const auto train_count = ctx.setting<std::size_t>(nullptr, "train_count", 60);
  const auto test_count = ctx.setting<std::size_t>(nullptr, "test_count", 40);
  const auto image_size = ctx.setting<std::size_t>(nullptr, "image_size", 32);
  OodExperimentConfig cfg;
  cfg.input_h = ctx.setting<std::size_t>(nullptr, "input_h", 16);
  cfg.input_w = ctx.setting<std::size_t>(nullptr, "input_w", 16);
  cfg.input_c = ctx.setting<std::size_t>(nullptr, "input_c", 3);
  cfg.eval_level = ctx.setting<int>(nullptr, "eval_level", 5);
  cfg.train_blur_level = ctx.setting<int>(nullptr, "train_blur_level", 5);
  cfg.classifier_train_count =
      ctx.setting<std::size_t>(nullptr, "classifier_train_count", 0);
  const auto hidden_dim = ctx.setting<std::size_t>(nullptr, "hidden_dim", 96);
  const auto latent_dim = ctx.setting<std::size_t>(nullptr, "latent_dim", 12);
  ctx.reject_unknown_config_keys();
  cfg.seed = SeededRng::derive(ctx.seed, 33);

  if (synthetic == !manifest_path.empty()) {
    throw DomainError("pass exactly one of --manifest or --synthetic");
  }
  OodDataset data;
  if (synthetic) {
    data = make_synthetic_ood_dataset(train_count, test_count, image_size,
                                      image_size, cfg.input_c,
                                      SeededRng::derive(ctx.seed, 32));
  } else {
    data.train_images = manifest_images(ctx, manifest_path, "train");
    data.test_images = manifest_images(ctx, manifest_path, "test");
  }

  VaeModel model = [&] {
    if (!checkpoint_path.empty()) {
      ctx.hash_input(checkpoint_path);
      LoadedCheckpoint lc = load_checkpoint(checkpoint_path);
      if (lc.family != ModelFamily::Vae) {
        throw DomainError("checkpoint " + checkpoint_path +
                          " does not hold the image model");
      }
      return std::move(*lc.vae);
    }
    VaeConfig vcfg;
    vcfg.input_dim = cfg.input_h * cfg.input_w * cfg.input_c;
    vcfg.hidden_dim = hidden_dim;
    vcfg.latent_dim = latent_dim;
    return VaeModel::init_random(vcfg, SeededRng::derive(ctx.seed, 31));
  }();

  const OodTable table = run_experiment(model, data, cfg);
  const std::string csv = ood_table_csv(table);
  ctx.write_output("ood_table.csv", csv);
  ctx.write_run_record();
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kProjectName) +
               " - gradient-feature toolbox for image quality and "
               "challenge detection"};
  app.require_subcommand(1);
  int code = 0;

  CommandContext sae_ctx;
  TrainDataFlags sae_flags;
  CLI::App* train_sae = app.add_subcommand(
      "train-sae", "train the sparse patch autoencoder with whitening");
  add_common_flags(train_sae, sae_ctx);
  train_sae->add_option("--manifest", sae_flags.manifest_path,
                        "dataset manifest with train records");
  train_sae->add_flag("--synthetic", sae_flags.synthetic,
                      "train on procedural images instead of a manifest");
  train_sae->callback([&] {
    sae_ctx.load_config("train-sae");
    code = run_train_sae(sae_ctx, sae_flags);
  });

  CommandContext vae_ctx;
  TrainDataFlags vae_flags;
  CLI::App* train_vae = app.add_subcommand(
      "train-vae", "train the variational image autoencoder");
  add_common_flags(train_vae, vae_ctx);
  train_vae->add_option("--manifest", vae_flags.manifest_path,
                        "dataset manifest with train records");
  train_vae->add_flag("--synthetic", vae_flags.synthetic,
                      "train on procedural images instead of a manifest");
  train_vae->callback([&] {
    vae_ctx.load_config("train-vae");
    code = run_train_vae(vae_ctx, vae_flags);
  });

  CommandContext gc_ctx;
  std::string gc_checkpoint;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "compare analytic gradients against central differences");
  add_common_flags(gradcheck, gc_ctx);
  gradcheck->add_option("--checkpoint", gc_checkpoint, "model checkpoint")
      ->required();
  gradcheck->callback([&] {
    gc_ctx.load_config("gradcheck");
    code = run_gradcheck(gc_ctx, gc_checkpoint);
  });

  CommandContext dist_ctx;
  std::string dist_input, dist_kind;
  int dist_level = 0;
  CLI::App* distort = app.add_subcommand(
      "distort", "apply a leveled distortion to an image or folder");
  add_common_flags(distort, dist_ctx);
  distort->add_option("--input", dist_input, "image file or folder")
      ->required();
  distort->add_option("--kind", dist_kind, "distortion kind name or code")
      ->required();
  distort->add_option("--level", dist_level, "severity level 0..5")
      ->required();
  distort->callback([&] {
    dist_ctx.load_config("distort");
    code = run_distort(dist_ctx, dist_input, dist_kind, dist_level);
  });

  CLI::App* iqa = app.add_subcommand("iqa", "full-reference quality scoring");
  iqa->require_subcommand(1);

  CommandContext score_ctx;
  std::string score_checkpoint, score_ref, score_dist;
  CLI::App* iqa_score_cmd =
      iqa->add_subcommand("score", "score one distorted image");
  add_common_flags(iqa_score_cmd, score_ctx);
  iqa_score_cmd->add_option("--checkpoint", score_checkpoint, "patch model")
      ->required();
  iqa_score_cmd->add_option("--ref", score_ref, "reference image")->required();
  iqa_score_cmd->add_option("--dist", score_dist, "distorted image")
      ->required();
  iqa_score_cmd->callback([&] {
    score_ctx.load_config("iqa score");
    code = run_iqa_score(score_ctx, score_checkpoint, score_ref, score_dist);
  });

  CommandContext eval_ctx;
  std::string eval_checkpoint, eval_manifest;
  CLI::App* iqa_eval_cmd =
      iqa->add_subcommand("eval", "evaluate a manifest with subjective scores");
  add_common_flags(iqa_eval_cmd, eval_ctx);
  iqa_eval_cmd->add_option("--checkpoint", eval_checkpoint, "patch model")
      ->required();
  iqa_eval_cmd->add_option("--manifest", eval_manifest, "dataset manifest")
      ->required();
  iqa_eval_cmd->callback([&] {
    eval_ctx.load_config("iqa eval");
    code = run_iqa_eval(eval_ctx, eval_checkpoint, eval_manifest);
  });

  CLI::App* ood = app.add_subcommand("ood", "challenge detection");
  ood->require_subcommand(1);

  CommandContext ood_ctx;
  std::string ood_checkpoint, ood_manifest;
  bool ood_synthetic = false;
  CLI::App* ood_run = ood->add_subcommand(
      "run", "train challenge classifiers and emit the accuracy table");
  add_common_flags(ood_run, ood_ctx);
  ood_run->add_option("--checkpoint", ood_checkpoint,
                      "image model (random initialization when omitted)");
  ood_run->add_option("--manifest", ood_manifest,
                      "dataset manifest with train and test records");
  ood_run->add_flag("--synthetic", ood_synthetic,
                    "use procedural images instead of a manifest");
  ood_run->callback([&] {
    ood_ctx.load_config("ood run");
    code = run_ood(ood_ctx, ood_checkpoint, ood_manifest, ood_synthetic);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return code;
}
