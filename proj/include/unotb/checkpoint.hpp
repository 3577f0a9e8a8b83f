#pragma once

#include <string>
#include <utility>
#include <vector>

#include "unotb/tensor.hpp"

namespace unotb {

// Checkpoint container. Byte layout (all integers little-endian uint32):
//   bytes 0..5   magic "UNOTB1"
//   u32          tensor count
//   per tensor:  u32 name length, name bytes,
//                u32 rank, u32 dims[rank],
//                float64 payload, row-major, little-endian
// Loading refuses files whose magic does not match.
void save_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, const Tensor*>>& tensors);

std::vector<std::pair<std::string, Tensor>> load_checkpoint(
    const std::string& path);

}  // namespace unotb
