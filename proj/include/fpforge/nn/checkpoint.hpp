#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fpforge/nn/tensor.hpp"

namespace fpforge::nn {

// Checkpoint layout (little-endian):
//   magic "FPFN"
//   format version      u32 (currently 1)
//   config length       u32, then UTF-8 JSON bytes
//   per-parameter records until EOF:
//     name length u32, name bytes
//     rank u32, dims u32 x rank
//     float32 payload, product(dims) values
constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

struct Checkpoint {
  std::string config_json;
  std::vector<NamedTensor> params;
};

// Stores are written back to back, entry order preserved, so a training run
// can persist several networks in one file.
void save_checkpoint(const std::filesystem::path& path, const std::string& config_json,
                     const std::vector<const ParamStore<float>*>& stores);

Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies loaded values into model parameters; the concatenated entries of
// `stores` must match the records in order, names and shapes exactly.
void restore_params(const Checkpoint& ckpt, const std::vector<ParamStore<float>*>& stores);

}  // namespace fpforge::nn
