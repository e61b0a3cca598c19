#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfs/nn.hpp"

namespace dfs::nn {

// "DFNW" weight container, version 1: magic, u32 version, u32 tensor count,
// then per tensor u32 rank, u32 dims..., raw little-endian f32 data. Tensors
// appear in layer order, weight before bias. Round trips are bit-exact.

std::vector<std::uint8_t> save_weights(const Network& net);

// Loads into an existing network; tensor shapes must match its layout.
void load_weights(Network& net, const std::vector<std::uint8_t>& bytes);

// Raw tensor list, no network needed.
std::vector<Tensor> read_weights(const std::vector<std::uint8_t>& bytes);

void save_weights_file(const Network& net, const std::string& path);
void load_weights_file(Network& net, const std::string& path);

// FNV-1a over the serialized bytes; used to assert stages stay frozen.
std::uint64_t weights_checksum(const Network& net);

}  // namespace dfs::nn
