#pragma once

#include <cstdint>
#include <optional>

#include "auvhunt/amadp/training.hpp"
#include "auvhunt/trace.hpp"

namespace auvhunt::amadp {

struct ExecutionConfig {
  /// Normalized return-to-go used as conditioning; defaults to the policy's
  /// dataset quantile.
  std::optional<double> target_return;
  /// Number of planned actions applied before replanning (1 = receding horizon).
  int open_loop_depth = 1;
  /// Seeds the sampler; episode-level noise comes from the environment seed.
  std::uint64_t seed = 0;

  void validate(int horizon) const;
};

/// The action plan for the current world: samples an H-step joint-state
/// trajectory and maps consecutive rows through each agent's inverse
/// dynamics. Returns up to `depth` joint actions.
std::vector<std::vector<env::HunterAction>> plan_actions(const Policy& policy,
                                                         const env::WorldState& world,
                                                         const env::EnvConfig& env_cfg,
                                                         double target_return, int depth, Rng& rng);

/// Runs one episode to termination under decentralized execution.
env::EpisodeTrace execute_episode(const env::EnvConfig& env_cfg, const Policy& policy,
                                  const ExecutionConfig& cfg);

}  // namespace auvhunt::amadp
