#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "auvhunt/nn/params.hpp"

namespace auvhunt::nn {

inline constexpr std::uint32_t kCheckpointMagic = 0x414D5750;
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct OptimizerSnapshot {
  std::uint64_t step = 0;
  std::vector<Tensor> first;
  std::vector<Tensor> second;
};

/// Checkpoint contents. `metadata` is an opaque JSON document owned by the
/// caller (configuration, RNG state, training step).
struct Checkpoint {
  std::string metadata;
  ParameterSet params;
  std::optional<OptimizerSnapshot> optimizer;
};

// Layout, little-endian:
//   u32 magic, u32 version, str metadata,
//   u32 count, then per parameter: str name, u32 ndim, u64 dims[ndim], f32 data[]
//   u32 has_optimizer [, u64 step, f32 m[] and f32 v[] per parameter]
//   u32 crc32 of every preceding byte
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace auvhunt::nn
