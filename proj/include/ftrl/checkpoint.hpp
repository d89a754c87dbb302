#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ftrl/models.hpp"
#include "ftrl/tensor.hpp"

namespace ftrl {

// Binary tensor container. Layout, all integers little-endian:
//   magic "FTRL1", version u32, tensor count u32, then per tensor:
//   name length u32, UTF-8 name, rank u32, dims (u32 each), data as f32.
struct NamedTensor {
    std::string name;
    Tensor value;
};

void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::string& path);

// Encoder convenience wrappers; the architecture is carried in a reserved
// "meta.encoder" tensor so a probe run can rebuild the graph from the file.
void save_encoder(const std::string& path, Graph& encoder, const EncoderConfig& cfg);
std::pair<Graph, EncoderConfig> load_encoder(const std::string& path);

}  // namespace ftrl
