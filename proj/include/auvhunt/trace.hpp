#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "auvhunt/environment.hpp"

namespace auvhunt::env {

/// One executed control step: the world after the step plus what produced it.
struct TraceStep {
  int step = 0;  ///< index of the step that was executed (0-based)
  std::vector<HunterAction> actions;
  MotionCommand target_action;
  WorldState world;  ///< state after the step
  RewardBreakdown reward;
  covert::DetectionSnapshot snapshot;
  std::vector<bool> collisions;
  EpisodeStatus status = EpisodeStatus::kRunning;
};

struct EpisodeTrace {
  std::uint64_t seed = 0;
  std::string policy;
  WorldState initial;
  std::vector<TraceStep> steps;
  EpisodeStatus status = EpisodeStatus::kRunning;

  int length() const { return static_cast<int>(steps.size()); }
};

inline TraceStep make_trace_step(int index, std::vector<HunterAction> actions,
                                 StepResult result) {
  TraceStep s;
  s.step = index;
  s.actions = std::move(actions);
  s.target_action = result.target_action;
  s.reward = result.rewards.front();
  s.snapshot = result.snapshot;
  s.collisions = std::move(result.collisions);
  s.status = result.status;
  s.world = std::move(result.world);
  return s;
}

}  // namespace auvhunt::env
