#pragma once

#include <functional>
#include <span>
#include <vector>

#include "auvhunt/amadp/networks.hpp"
#include "auvhunt/amadp/schedule.hpp"
#include "auvhunt/dataset.hpp"

namespace auvhunt::amadp {

struct GuidanceConfig {
  double dropout_prob = 0.25;     ///< chance of null conditioning per training sample
  double guidance_weight = 1.2;   ///< w in eps_null + w (eps_cond - eps_null)
  /// Bound on |x0 estimate| during sampling, in normalized units; 0 disables.
  double denoise_clip = 6.0;
  /// Multiplies the sqrt(Sigma_k) noise of each reverse step (1 = plain DDPM).
  double sample_noise_scale = 1.0;
  /// Loss weight on window row 1, the state the executed actions are read from.
  double next_state_weight = 1.0;

  void validate() const;
};

/// Any noise predictor: (binding, x_k rows, conditioning) -> eps rows.
using EpsilonFn = std::function<Var(const Binding&, Var, const ConditioningBatch&)>;

EpsilonFn epsilon_fn(const NoisePredictor& predictor);

/// Training windows with padded rows overwritten by the last real row, so
/// that nothing downstream ever reads padded data.
std::vector<float> clean_windows(const dataset::Batch& batch);

/// Classifier-free-guided DDPM loss on one batch. Each sample draws k
/// uniformly from [1, K], standard normal noise and (with probability
/// dropout_prob) null conditioning. Row 0 of every window is the observed
/// current state: it is clamped in x_k and excluded from the loss together
/// with padded rows.
Var ddpm_loss(const EpsilonFn& eps, const Binding& bind, const dataset::Batch& batch,
              const DiffusionSchedule& schedule, const GuidanceConfig& guidance, Rng& rng);

/// Mean squared error of the inverse-dynamics heads over every real
/// (s_t, a_t, s_{t+1}) triple of the batch, in action-code space.
Var inverse_dynamics_loss(const PolicyModel& model, const Binding& bind,
                          const dataset::Batch& batch);

/// eps_null + w (eps_cond - eps_null); returns eps_cond unchanged when w == 1.
std::vector<float> guided_epsilon(std::span<const float> eps_cond, std::span<const float> eps_null,
                                  double w);

/// Reverse process from x_K ~ N(0, I) to x_0 for one conditioning. The first
/// row is clamped to the conditioning state after every step and no noise
/// is added at k = 1. Returns H x joint_dim, row-major.
std::vector<float> p_sample_loop(const EpsilonFn& eps, const ParameterSet& params,
                                 const dataset::Conditioning& cond, int horizon,
                                 const DiffusionSchedule& schedule, const GuidanceConfig& guidance,
                                 Rng& rng);

}  // namespace auvhunt::amadp
