#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "auvhunt/behavior.hpp"
#include "auvhunt/environment.hpp"

namespace auvhunt::dataset {

inline constexpr int kObstacleSlots = 2;
/// own position (2), speed (1), heading sin/cos (2), target offset (2) plus
/// unobserved flag (1), nearest obstacle offsets (2 * kObstacleSlots).
inline constexpr int kStateDim = 8 + 2 * kObstacleSlots;
inline constexpr int kActionDim = 2;
inline constexpr std::uint32_t kEpisodeMagic = 0x414D4450;  // "AMDP"
inline constexpr int kFormatVersion = 1;

using AgentFeatures = std::array<float, kStateDim>;

/// Per-agent state vector built from one hunter's observation.
AgentFeatures encode_state(const env::Observation& obs, const env::WorldConfig& cfg);

/// Agents contiguous within a step: [agent0 | agent1 | ...].
std::vector<float> encode_joint_state(const env::WorldState& world,
                                      const env::EnvConfig& cfg);

/// One rollout. Entry t holds the state before action t, action t (theta, v),
/// the shared reward of transition t -> t+1 and the KL audit of state t. The
/// final entry is the terminal state with zero action and reward.
struct EpisodeRecord {
  int m_hunters = 0;
  int state_dim = kStateDim;
  std::vector<float> states;   ///< steps x M x state_dim
  std::vector<float> actions;  ///< steps x M x 2
  std::vector<float> rewards;  ///< steps
  std::vector<float> kl;       ///< steps
  env::EpisodeStatus status = env::EpisodeStatus::kRunning;
  behavior::Policy policy = behavior::Policy::kPursuit;

  int steps() const { return static_cast<int>(rewards.size()); }
  int joint_dim() const { return m_hunters * state_dim; }
  std::span<const float> joint_state(int t) const;
  void validate() const;
};

struct BehaviorMix {
  double pursuit = 0.4;
  double encircle = 0.4;
  double noisy = 0.2;
  double noise_min = 0.3;  ///< noisy episodes draw their noise level uniformly
  double noise_max = 0.9;  ///< from [noise_min, noise_max]
  behavior::BehaviorParams params;

  void validate() const;
};

struct Manifest {
  int version = kFormatVersion;
  int episode_count = 0;
  int m_hunters = 0;
  int state_dim = kStateDim;
  int action_dim = kActionDim;
  int horizon = 40;
  double discount = 0.9;
  double return_scale = 3000.0;
  std::vector<double> state_mean;
  std::vector<double> state_std;
  std::uint64_t root_seed = 0;
  BehaviorMix behavior;
  double success_fraction = 0.0;
  std::uint32_t episodes_crc32 = 0;
  std::uint64_t episodes_bytes = 0;
};

struct Dataset {
  Manifest manifest;
  std::vector<EpisodeRecord> episodes;
};

struct GenerateOptions {
  int n_episodes = 200;
  std::uint64_t root_seed = 0;
  int horizon = 40;
  double discount = 0.9;
  double return_scale = 3000.0;
};

/// Rolls out seeded scripted-policy episodes. Episode e uses environment seed
/// derive_seed(root, "episode", e).
Dataset generate(const env::EnvConfig& env_cfg, const BehaviorMix& mix,
                 const GenerateOptions& options);

/// Runs one scripted episode.
EpisodeRecord rollout(const env::EnvConfig& env_cfg, behavior::Policy policy,
                      const behavior::BehaviorParams& params, std::uint64_t behavior_seed);

/// G_t = r_t + discount * G_{t+1}, with G after the last entry equal to 0.
std::vector<double> returns_to_go(std::span<const float> rewards, double discount);

/// Per joint-dimension mean and std over every stored state; zero-variance
/// dimensions get std 1.
void compute_normalization(Dataset& data);

/// Flattens per-agent state sequences (each steps x state_dim) into the
/// interleaved layout, and back.
std::vector<float> interleave(std::span<const std::vector<float>> per_agent, int state_dim);
std::vector<std::vector<float>> deinterleave(std::span<const float> joint, int m_hunters,
                                             int state_dim);

struct Conditioning {
  std::vector<float> current_state;  ///< normalized joint state, joint_dim
  float return_to_go = 0.0f;          ///< raw return / return_scale
  float timestep = 0.0f;
};

/// A training batch of B windows of length H over the joint state.
struct Batch {
  int batch = 0;
  int horizon = 0;
  int joint_dim = 0;
  int m_hunters = 0;
  std::vector<float> windows;      ///< B x H x joint_dim, normalized
  std::vector<float> raw_windows;  ///< B x H x joint_dim, unnormalized
  std::vector<float> mask;         ///< B x H; 1 for real entries, 0 for padding
  std::vector<float> actions;      ///< B x H x M x 2 (theta, v)
  std::vector<float> action_mask;  ///< B x H; 1 where (s_t, a_t, s_t+1) is real
  std::vector<Conditioning> conditioning;
};

/// Samples (episode, start) pairs uniformly over all stored steps. Windows
/// running past the end repeat the terminal state and are masked.
Batch window_batch(const Dataset& data, int batch_size, int horizon, Rng& rng);

std::vector<float> normalize(const Manifest& manifest, std::span<const float> joint);
std::vector<float> denormalize(const Manifest& manifest, std::span<const float> joint);

/// Writes manifest.json and episodes.bin into `dir`.
void save(const Dataset& data, const std::filesystem::path& dir);
Dataset load(const std::filesystem::path& dir);

/// Serialized episodes.bin contents.
std::vector<std::uint8_t> encode_episodes(std::span<const EpisodeRecord> episodes);
std::vector<EpisodeRecord> decode_episodes(std::span<const std::uint8_t> bytes);

/// Quantile (0..1) of every per-step normalized return-to-go in the dataset.
double return_quantile(const Dataset& data, double q);

}  // namespace auvhunt::dataset
