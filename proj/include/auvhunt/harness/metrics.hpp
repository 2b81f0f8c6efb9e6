#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "auvhunt/behavior.hpp"
#include "auvhunt/trace.hpp"

namespace auvhunt::harness {

/// Runs one scripted-policy episode and records every step.
env::EpisodeTrace run_scripted(const env::EnvConfig& env_cfg, behavior::Policy policy,
                               const behavior::BehaviorParams& params,
                               std::uint64_t behavior_seed);

/// Calls `episode(i)` for i in [0, n) on `threads` workers. Results are
/// ordered by index regardless of scheduling.
std::vector<env::EpisodeTrace> run_episodes(int n, int threads,
                                            const std::function<env::EpisodeTrace(int)>& episode);

struct EpisodeSummary {
  int index = 0;
  std::uint64_t seed = 0;
  env::EpisodeStatus status = env::EpisodeStatus::kRunning;
  int length = 0;
  int collisions = 0;          ///< steps with at least one collided hunter
  int covert_violations = 0;   ///< steps with KL above the bound
  double total_reward = 0.0;
};

struct MetricsReport {
  std::string policy;
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_length = 0.0;
  /// kl_mean[t] is the mean KL at step t+1 over episodes still running then;
  /// its length is the longest episode.
  std::vector<double> kl_mean;
  std::vector<int> kl_count;
  double kl_bound = 0.0;
  double violation_fraction = 0.0;  ///< over all executed steps
  int collision_count = 0;
  std::string loss_curve;           ///< path of the training loss CSV, if any
  std::string config_hash;
  std::vector<EpisodeSummary> per_episode;
};

MetricsReport summarize(std::span<const env::EpisodeTrace> traces, const env::EnvConfig& env_cfg,
                        std::string policy);

nlohmann::ordered_json to_json(const MetricsReport& report);

/// Counts successes from the final hunter and target positions alone, without
/// consulting the recorded status or the environment's classifier.
int rescore_successes(std::span<const env::EpisodeTrace> traces, double attack_radius);

}  // namespace auvhunt::harness
