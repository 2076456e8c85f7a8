#pragma once

#include <cstdint>
#include <filesystem>

#include "bsuv/network.hpp"

namespace bsuv {

// File layout: "BSUVCKPT", uint32 version, uint64 header length, JSON header
// {network, step, tensors: [{name, shape, offset, count}]}, then float64
// little-endian values in header order.
struct Checkpoint {
  SegmentationNet net;
  std::int64_t step = 0;
};

void save_checkpoint(const std::filesystem::path& path, const SegmentationNet& net, std::int64_t step);

/// Throws CheckpointFormat on bad magic, version, or tensor layout.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace bsuv
