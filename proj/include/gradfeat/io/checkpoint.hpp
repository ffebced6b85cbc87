#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/hash.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/io/base64.hpp"
#include "gradfeat/io/file_util.hpp"
#include "gradfeat/models/params.hpp"
#include "gradfeat/models/sae.hpp"
#include "gradfeat/models/vae.hpp"
#include "gradfeat/train/zca.hpp"

namespace gradfeat {

// Single-file JSON checkpoints. Arrays are base64-coded little-endian 64-bit
// floats; the checksum chains over every array's raw bytes in order of
// appearance (weights in canonical parameter order, then ZCA mean and matrix
// when present). Key order is fixed, so save -> load -> save is
// byte-identical.

inline constexpr int kCheckpointFormatVersion = 1;

namespace detail {

inline std::vector<std::uint8_t> doubles_to_le(const Tensor& t) {
  std::vector<std::uint8_t> bytes(t.size() * 8);
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::uint64_t u;
    std::memcpy(&u, &t.data()[i], 8);
    for (int k = 0; k < 8; ++k) {
      bytes[i * 8 + static_cast<std::size_t>(k)] =
          static_cast<std::uint8_t>((u >> (8 * k)) & 0xff);
    }
  }
  return bytes;
}

inline std::vector<double> le_to_doubles(const std::vector<std::uint8_t>& bytes,
                                         const std::string& field) {
  if (bytes.size() % 8 != 0) {
    throw CheckpointError("field '" + field + "': payload of " +
                          std::to_string(bytes.size()) +
                          " bytes is not a multiple of 8");
  }
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t u = 0;
    for (int k = 7; k >= 0; --k) {
      u = (u << 8) | bytes[i * 8 + static_cast<std::size_t>(k)];
    }
    std::memcpy(&out[i], &u, 8);
  }
  return out;
}

inline nlohmann::ordered_json tensor_to_json(const Tensor& t,
                                             std::uint64_t& checksum) {
  const std::vector<std::uint8_t> bytes = doubles_to_le(t);
  checksum = fnv1a64(bytes.data(), bytes.size(), checksum);
  nlohmann::ordered_json j;
  j["shape"] = t.shape();
  j["data"] = base64_encode(bytes.data(), bytes.size());
  return j;
}

inline Tensor tensor_from_json(const nlohmann::ordered_json& j,
                               const std::string& field,
                               std::uint64_t& checksum) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("data")) {
    throw CheckpointError("field '" + field + "': expected {shape, data}");
  }
  std::vector<std::size_t> shape;
  try {
    shape = j["shape"].get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception&) {
    throw CheckpointError("field '" + field + "': bad shape");
  }
  std::vector<std::uint8_t> bytes;
  try {
    bytes = base64_decode(j["data"].get<std::string>());
  } catch (const ParseError& e) {
    throw CheckpointError("field '" + field + "': " + e.what());
  }
  checksum = fnv1a64(bytes.data(), bytes.size(), checksum);
  std::vector<double> values = le_to_doubles(bytes, field);
  std::size_t volume = 1;
  for (std::size_t d : shape) volume *= d;
  if (volume != values.size() || shape.empty()) {
    throw CheckpointError("field '" + field + "': shape does not match " +
                          std::to_string(values.size()) + " values");
  }
  return Tensor(std::move(shape), std::move(values));
}

template <typename Model>
void fill_weights(nlohmann::ordered_json& doc, const Model& model,
                  std::uint64_t& checksum) {
  nlohmann::ordered_json weights;
  for (const ConstParamRef& p : model.params()) {
    weights[p.name] = tensor_to_json(*p.tensor, checksum);
  }
  doc["weights"] = std::move(weights);
}

template <typename Model>
void read_weights(const nlohmann::ordered_json& doc, Model& model,
                  std::uint64_t& checksum) {
  if (!doc.contains("weights") || !doc["weights"].is_object()) {
    throw CheckpointError("field 'weights': missing or not an object");
  }
  for (const ParamRef& p : model.params()) {
    if (!doc["weights"].contains(p.name)) {
      throw CheckpointError("field 'weights." + p.name + "': missing");
    }
    Tensor t = tensor_from_json(doc["weights"][p.name], "weights." + p.name,
                                checksum);
    if (t.shape() != p.tensor->shape()) {
      throw CheckpointError("field 'weights." + p.name + "': shape " +
                            t.shape_string() + " does not match model " +
                            p.tensor->shape_string());
    }
    *p.tensor = std::move(t);
  }
}

inline void finish_document(nlohmann::ordered_json& doc,
                            std::uint64_t checksum) {
  doc["checksum"] = hex64(checksum);
}

}  // namespace detail

inline std::string encode_checkpoint(const SaeModel& model,
                                     const ZcaTransform* zca = nullptr) {
  nlohmann::ordered_json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["model_family"] = "sae";
  doc["architecture"] = {{"input_dim", model.config.input_dim},
                         {"latent_dim", model.config.latent_dim},
                         {"activations", {"sigmoid", "linear"}}};
  doc["hyperparameters"] = {{"beta", model.config.beta},
                            {"lambda", model.config.lambda}};
  std::uint64_t checksum = 0xcbf29ce484222325ULL;
  detail::fill_weights(doc, model, checksum);
  if (zca != nullptr) {
    nlohmann::ordered_json z;
    z["epsilon"] = zca->epsilon;
    z["mean"] = detail::tensor_to_json(zca->mean, checksum);
    z["whitening_matrix"] = detail::tensor_to_json(zca->whitening_matrix, checksum);
    doc["zca"] = std::move(z);
  }
  detail::finish_document(doc, checksum);
  return doc.dump(2) + "\n";
}

inline std::string encode_checkpoint(const VaeModel& model) {
  nlohmann::ordered_json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["model_family"] = "vae";
  doc["architecture"] = {{"input_dim", model.config.input_dim},
                         {"hidden_dim", model.config.hidden_dim},
                         {"latent_dim", model.config.latent_dim},
                         {"activations", {"sigmoid", "linear", "sigmoid"}}};
  doc["hyperparameters"] = {{"logvar_min", model.config.logvar_min},
                            {"logvar_max", model.config.logvar_max}};
  std::uint64_t checksum = 0xcbf29ce484222325ULL;
  detail::fill_weights(doc, model, checksum);
  detail::finish_document(doc, checksum);
  return doc.dump(2) + "\n";
}

struct LoadedCheckpoint {
  ModelFamily family = ModelFamily::Sae;
  std::optional<SaeModel> sae;
  std::optional<VaeModel> vae;
  std::optional<ZcaTransform> zca;
};

inline LoadedCheckpoint decode_checkpoint(const std::string& bytes) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.contains("format_version") ||
      !doc["format_version"].is_number_integer()) {
    throw CheckpointError("field 'format_version': missing");
  }
  const int version = doc["format_version"].get<int>();
  if (version != kCheckpointFormatVersion) {
    throw CheckpointError("field 'format_version': unsupported version " +
                          std::to_string(version) + ", this build reads " +
                          std::to_string(kCheckpointFormatVersion));
  }
  if (!doc.contains("model_family") || !doc["model_family"].is_string()) {
    throw CheckpointError("field 'model_family': missing");
  }
  const std::string family = doc["model_family"].get<std::string>();
  if (!doc.contains("architecture") || !doc.contains("hyperparameters")) {
    throw CheckpointError("field 'architecture'/'hyperparameters': missing");
  }
  const auto& arch = doc["architecture"];
  const auto& hyper = doc["hyperparameters"];

  LoadedCheckpoint out;
  std::uint64_t checksum = 0xcbf29ce484222325ULL;
  if (family == "sae") {
    SaeConfig cfg;
    try {
      cfg.input_dim = arch.at("input_dim").get<std::size_t>();
      cfg.latent_dim = arch.at("latent_dim").get<std::size_t>();
      cfg.beta = hyper.at("beta").get<double>();
      cfg.lambda = hyper.at("lambda").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw CheckpointError(std::string("field 'architecture': ") + e.what());
    }
    cfg.validate();
    SaeModel model(cfg);
    detail::read_weights(doc, model, checksum);
    out.family = ModelFamily::Sae;
    out.sae = std::move(model);
    if (doc.contains("zca")) {
      ZcaTransform z;
      const auto& jz = doc["zca"];
      if (!jz.contains("epsilon") || !jz.contains("mean") ||
          !jz.contains("whitening_matrix")) {
        throw CheckpointError("field 'zca': expected epsilon, mean, "
                              "whitening_matrix");
      }
      z.epsilon = jz["epsilon"].get<double>();
      z.mean = detail::tensor_from_json(jz["mean"], "zca.mean", checksum);
      z.whitening_matrix = detail::tensor_from_json(
          jz["whitening_matrix"], "zca.whitening_matrix", checksum);
      out.zca = std::move(z);
    }
  } else if (family == "vae") {
    VaeConfig cfg;
    try {
      cfg.input_dim = arch.at("input_dim").get<std::size_t>();
      cfg.hidden_dim = arch.at("hidden_dim").get<std::size_t>();
      cfg.latent_dim = arch.at("latent_dim").get<std::size_t>();
      cfg.logvar_min = hyper.at("logvar_min").get<double>();
      cfg.logvar_max = hyper.at("logvar_max").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw CheckpointError(std::string("field 'architecture': ") + e.what());
    }
    cfg.validate();
    VaeModel model(cfg);
    detail::read_weights(doc, model, checksum);
    out.family = ModelFamily::Vae;
    out.vae = std::move(model);
  } else {
    throw CheckpointError("field 'model_family': unknown family '" + family +
                          "'");
  }

  if (!doc.contains("checksum") || !doc["checksum"].is_string()) {
    throw CheckpointError("field 'checksum': missing");
  }
  const std::string stored = doc["checksum"].get<std::string>();
  if (stored != hex64(checksum)) {
    throw CheckpointError("field 'checksum': stored " + stored +
                          " does not match computed " + hex64(checksum));
  }
  return out;
}

inline void save_checkpoint(const SaeModel& model, const ZcaTransform* zca,
                            const std::string& path) {
  write_file_atomic(path, encode_checkpoint(model, zca));
}

inline void save_checkpoint(const VaeModel& model, const std::string& path) {
  write_file_atomic(path, encode_checkpoint(model));
}

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace gradfeat
