#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "auvhunt/amadp/execution.hpp"
#include "auvhunt/dataset.hpp"

namespace auvhunt::harness {

struct EvalConfig {
  int episodes = 50;
  int threads = 1;
  /// Success-vs-training-step curve: evaluate every `curve_every` steps on
  /// `curve_episodes` seeds.
  int curve_every = 1000;
  int curve_episodes = 50;
  /// Episodes written to the trajectory CSV.
  int trajectory_episodes = 1;

  void validate() const;
};

/// The whole parameter tree. Component seeds are not stored here; they are
/// derived from `seed` (see seeds()).
struct RunConfig {
  std::uint64_t seed = 0;
  env::EnvConfig env;
  dataset::BehaviorMix behavior;
  dataset::GenerateOptions dataset;
  amadp::TrainConfig train;
  amadp::ExecutionConfig execution;
  EvalConfig eval;

  /// Cross-section consistency plus every component's own validate().
  void validate() const;
};

/// Component seeds split from the root seed by stage name.
struct Seeds {
  std::uint64_t dataset;
  std::uint64_t train;
  std::uint64_t sampler;
  std::uint64_t eval;     ///< episode e uses derive_seed(eval, "episode", e)
  std::uint64_t simulate;
};
Seeds seeds(const RunConfig& cfg);

/// Environment config for evaluation episode `index`.
env::EnvConfig episode_env(const RunConfig& cfg, std::uint64_t stage_seed, int index);

/// Training config with the derived seed and the network tied to the
/// environment (M, V1) and horizon.
amadp::TrainConfig training_config(const RunConfig& cfg);
dataset::GenerateOptions dataset_options(const RunConfig& cfg);

struct FieldInfo {
  std::string path;  ///< dotted, e.g. "arena.width"
  std::string type;  ///< number | integer | string | [x, y] | array[N] | number|null
  std::string doc;
  nlohmann::ordered_json default_value;
};

/// Every accepted key with its type, default and description.
std::vector<FieldInfo> schema();

nlohmann::ordered_json to_json(const RunConfig& cfg);
/// Strict parse: unknown keys, wrong types and invalid values raise
/// ValidationError naming the offending path ("config.arena.width: ...").
/// Missing keys keep their defaults.
RunConfig from_json(const nlohmann::json& j);

RunConfig load_config(const std::filesystem::path& path);
/// Canonical serialization used for hashing and --print-defaults.
std::string dump(const RunConfig& cfg);
/// 16 hex digits of FNV-1a over dump(cfg).
std::string config_hash(const RunConfig& cfg);

}  // namespace auvhunt::harness
