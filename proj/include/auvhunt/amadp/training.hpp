#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "auvhunt/amadp/diffusion.hpp"
#include "auvhunt/nn/checkpoint.hpp"

namespace auvhunt::amadp {

struct ScheduleConfig {
  int K = 200;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  DiffusionSchedule make() const { return make_schedule(K, beta_start, beta_end); }
};

struct TrainConfig {
  int steps = 20000;
  int batch = 32;
  double lr = 1e-4;
  int checkpoint_every = 1000;  ///< 0 disables periodic checkpoints
  int log_every = 10;
  std::uint64_t seed = 0;
  /// Quantile of dataset returns-to-go used as the execution-time target.
  double target_return_quantile = 0.9;
  NetworkConfig network;
  ScheduleConfig schedule;
  GuidanceConfig guidance;

  void validate() const;
};

struct LossRecord {
  int step = 0;
  double total = 0.0;
  double diffusion = 0.0;
  double inverse = 0.0;
};

/// Everything execution needs: the networks, the diffusion settings and the
/// dataset normalization used in training.
struct Policy {
  PolicyModel model;
  DiffusionSchedule schedule;
  ScheduleConfig schedule_config;
  GuidanceConfig guidance;
  dataset::Manifest normalization;  ///< state_mean/state_std/discount/return_scale
  double target_return = 0.0;       ///< normalized return-to-go conditioning
  int step = 0;
};

/// Stateful optimizer loop over a dataset. Deterministic given the seed.
class Trainer {
 public:
  Trainer(const dataset::Dataset& data, const TrainConfig& cfg);
  /// Continues from a checkpoint written by `checkpoint()`.
  Trainer(const dataset::Dataset& data, const TrainConfig& cfg, const nn::Checkpoint& ckpt);

  /// One Adam step on a fresh batch.
  LossRecord step();
  int step_count() const { return step_; }

  nn::Checkpoint checkpoint() const;
  Policy policy() const;
  const PolicyModel& model() const { return model_; }

 private:
  void check_compatible() const;

  const dataset::Dataset* data_;
  TrainConfig cfg_;
  PolicyModel model_;
  DiffusionSchedule schedule_;
  nn::Adam adam_;
  Rng rng_;
  int step_ = 0;
  double target_return_ = 0.0;
};

/// Runs `cfg.steps` steps. `on_checkpoint` fires every checkpoint_every steps
/// and after the last step. Returns the logged loss curve.
std::vector<LossRecord> train(const dataset::Dataset& data, const TrainConfig& cfg,
                              const std::function<void(int, const nn::Checkpoint&)>& on_checkpoint);

/// Rebuilds an executable policy from checkpoint contents.
Policy policy_from_checkpoint(const nn::Checkpoint& ckpt);
Policy load_policy(const std::filesystem::path& path);

}  // namespace auvhunt::amadp
