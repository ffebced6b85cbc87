#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gradfeat/core/hash.hpp"
#include "gradfeat/core/tensor.hpp"

namespace gradfeat {

enum class ModelFamily { Sae, Vae };

inline const char* family_name(ModelFamily f) {
  return f == ModelFamily::Sae ? "sae" : "vae";
}

// Named handle onto one parameter tensor of a model. Models hand out their
// parameters in a canonical order that optimizers, gradient bundles and
// checkpoints all share.
struct ParamRef {
  std::string name;
  Tensor* tensor;
};

struct ConstParamRef {
  std::string name;
  const Tensor* tensor;
};

// Order-sensitive digest of all parameter bytes; equal checksums on equal
// architectures mean bit-identical weights.
template <typename Model>
std::uint64_t model_checksum(const Model& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const ConstParamRef& p : model.params()) {
    h = fnv1a64(p.tensor->data().data(), p.tensor->size() * sizeof(double), h);
  }
  return h;
}

}  // namespace gradfeat
