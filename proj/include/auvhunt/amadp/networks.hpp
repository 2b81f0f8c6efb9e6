#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "auvhunt/dataset.hpp"
#include "auvhunt/nn/params.hpp"

namespace auvhunt::amadp {

using nn::Binding;
using nn::ParameterSet;
using nn::Tape;
using nn::Tensor;
using nn::Var;

/// Architecture hyperparameters shared by the noise predictor and the
/// inverse-dynamics heads.
struct NetworkConfig {
  int m_hunters = 3;
  int state_dim = dataset::kStateDim;
  int horizon = 40;          ///< must be a multiple of 8 (three stride-2 blocks)
  int hidden = 64;           ///< trunk width
  int embed = 64;            ///< conditioning embedding width
  int attention_dim = 32;    ///< d_k = d_v per agent head
  int inverse_hidden = 64;
  double v_max = 0.3;        ///< hunter speed limit used to scale actions
  double timestep_scale = 100.0;

  int joint_dim() const { return m_hunters * state_dim; }
  void validate() const;
};

/// Conditioning inputs for a batch of B windows. `null_mask[b] = 1` replaces
/// sample b's conditioning with the learned null embedding.
struct ConditioningBatch {
  int batch = 0;
  std::vector<float> state;       ///< B x joint_dim (normalized)
  std::vector<float> rtg;         ///< B
  std::vector<float> timestep;    ///< B
  std::vector<float> null_mask;   ///< B, 0 or 1
  std::vector<int> diffusion_k;   ///< B, in [1, K]
};

ConditioningBatch make_conditioning(std::span<const dataset::Conditioning> cond,
                                    std::span<const int> diffusion_k,
                                    std::span<const float> null_mask);

/// Sinusoidal embedding of the diffusion step (B x width).
Tensor step_embedding(std::span<const int> k, int width);

/// Temporal encoder/decoder noise predictor epsilon_theta(x_k, y, k).
///
/// Three down blocks halve the window length (pairs of rows are concatenated
/// and projected, i.e. a stride-2 temporal convolution of width 2), an
/// adaptive-attention bridge follows the first down block, and three up
/// blocks double it again with skip concatenation. Each block receives the
/// conditioning embedding.
class NoisePredictor {
 public:
  NoisePredictor() = default;
  NoisePredictor(const NetworkConfig& cfg, ParameterSet& params, Rng& rng);

  /// x: (B*H) x joint_dim, rows of one window contiguous.
  Var forward(const Binding& bind, Var x, const ConditioningBatch& cond) const;

  const NetworkConfig& config() const { return cfg_; }

 private:
  struct Block {
    nn::Dense proj;
    nn::Dense film;
    nn::LayerNorm norm;
  };

  Var block(const Binding& bind, const Block& b, Var h, Var emb, std::size_t rows_per_sample) const;
  Var attention(const Binding& bind, Var h, Var x, int batch, int rows) const;

  NetworkConfig cfg_;
  nn::Dense cond_in_;
  nn::Dense cond_hidden_;
  nn::Dense step_in_;
  nn::Dense embed_out_;
  std::size_t null_embedding_ = 0;
  nn::Dense input_;
  Block stem_;
  Block down_[3];
  nn::Dense query_;
  nn::Dense agent_query_;
  nn::Dense key_;
  nn::Dense value_;
  nn::Dense attn_out_;
  nn::Dense up_expand_[3];
  Block up_[3];
  nn::Dense output_;
};

/// Per-agent action encoding (cos theta, sin theta, v / v_max).
inline constexpr int kActionCode = 3;

std::array<float, kActionCode> encode_action(double theta, double v, double v_max);
env::HunterAction decode_action(std::span<const float> code, double v_max);

/// f_phi for one agent: [s_t, s_{t+1}, s_{t+1} - s_t] -> action code.
class InverseDynamics {
 public:
  InverseDynamics() = default;
  InverseDynamics(const NetworkConfig& cfg, int agent, ParameterSet& params, Rng& rng);

  /// s_t, s_next: N x state_dim (normalized). Returns N x kActionCode.
  Var forward(const Binding& bind, Var s_t, Var s_next) const;

 private:
  nn::Dense l1_;
  nn::Dense l2_;
  nn::Dense out_;
};

/// Noise predictor plus one inverse-dynamics head per agent, all sharing
/// one parameter set.
struct PolicyModel {
  NetworkConfig config;
  ParameterSet params;
  NoisePredictor predictor;
  std::vector<InverseDynamics> inverse;

  static PolicyModel create(const NetworkConfig& config, std::uint64_t seed);

  /// Predicts actions for every agent from normalized joint states
  /// s_t, s_{t+1} (each joint_dim).
  std::vector<env::HunterAction> actions(std::span<const float> s_t,
                                         std::span<const float> s_next) const;
};

/// Closed-form kinematic inverse from two planar positions over dt:
/// heading of the displacement and its mean speed.
env::HunterAction analytic_inverse(kinematics::Vec2 p_t, kinematics::Vec2 p_next, double dt);

/// Closed-form inverse from raw (unnormalized) per-agent state features:
/// the realized heading and speed stored in s_{t+1}.
env::HunterAction analytic_inverse_features(std::span<const float> s_next, double v_max);

}  // namespace auvhunt::amadp
