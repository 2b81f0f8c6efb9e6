#pragma once

#include <array>
#include <string_view>

#include "auvhunt/environment.hpp"

namespace auvhunt::behavior {

enum class Policy { kPursuit, kEncircle, kNoisyPursuit };

std::string_view to_string(Policy policy);
/// Throws ValidationError on an unknown name.
Policy policy_from_string(std::string_view name);

struct BehaviorParams {
  double encircle_radius = 90.0;  ///< slot radius around the target (m)
  double noise_prob = 0.3;        ///< chance per step of a random heading
  double obstacle_influence = 40.0;  ///< clearance (m) at which avoidance starts
  double teammate_spacing = 3.0;     ///< teammate avoidance radius in units of r_min
};

/// Scripted hunter controller acting on one hunter's own observation.
env::HunterAction act(Policy policy, const env::Observation& obs, int agent,
                      const env::EnvConfig& cfg, const BehaviorParams& params,
                      Rng& rng);

}  // namespace auvhunt::behavior
