#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "auvhunt/acoustics.hpp"
#include "auvhunt/covert.hpp"
#include "auvhunt/kinematics.hpp"

namespace auvhunt::env {

using kinematics::AgentState;
using kinematics::MotionCommand;
using kinematics::Obstacle;
using kinematics::Vec2;

using HunterAction = MotionCommand;

struct RewardWeights {
  double lambda = 20.0;
  double zeta = 6000.0;
  double nu = 10.0;
};

struct EpisodeConfig {
  int m_hunters = 3;
  double r1 = 800.0;         ///< sensing radius
  double r2 = 150.0;         ///< attacking radius
  double d_g_star = 120.0;   ///< desired centroid distance
  int h_max_steps = 500;
  RewardWeights weights;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class DynamicsMode { kKinematic, kFull };

struct EvaderParams {
  double hunter_gain = 1.0;
  double obstacle_gain = 0.5;
  double wall_gain = 0.5;
  /// Standard deviation of heading noise (rad); zero gives a deterministic flee.
  double heading_noise = 0.0;
};

struct WorldConfig {
  kinematics::Arena arena;
  Vec2 start{500.0, 500.0};
  double dt = 10.0;
  kinematics::MotionLimits hunter_limits{0.3, 0.01, std::numbers::pi / 40.0};
  kinematics::MotionLimits target_limits{0.2, 0.02, std::numbers::pi / 40.0};
  int obstacle_count = 5;
  double obstacle_radius_min = 40.0;
  double obstacle_radius_max = 80.0;
  Vec2 current{};  ///< optional additive ocean current (m/s)
  DynamicsMode dynamics = DynamicsMode::kKinematic;
  kinematics::HydrodynamicModel hydro;
  double tracking_gain = 0.1;
  EvaderParams evader;
  acoustics::ChannelParams channel;
  covert::CovertParams covert;
  double reference_scale = 1e-9;
  double min_link_distance_m = 1.0;

  void validate() const;
  /// N_u in watts for this channel and calibration constant.
  double ambient_noise_w() const;
};

struct EnvConfig {
  WorldConfig world;
  EpisodeConfig episode;

  void validate() const;
};

enum class EpisodeStatus { kRunning, kSuccess, kFailureTimeout, kFailureNeverDetected };

std::string_view to_string(EpisodeStatus status);
bool is_terminal(EpisodeStatus status);

struct WorldState {
  std::vector<AgentState> hunters;
  AgentState target;
  std::vector<Obstacle> obstacles;
  /// Body velocities, used only by the full-dynamics mode.
  std::vector<kinematics::BodyVelocity> hunter_body;
  kinematics::BodyVelocity target_body;
  int step_index = 0;
  bool target_detected = false;
  EpisodeStatus status = EpisodeStatus::kRunning;

  friend bool operator==(const WorldState& a, const WorldState& b);
};

/// One hunter's local view, in the order velocity, own position, obstacle
/// positions, other agents' positions. The target slot is empty until the
/// formation has acquired it.
struct Observation {
  double own_speed = 0.0;
  kinematics::Pose2 own_pose;
  std::vector<Vec2> obstacle_positions;
  std::vector<double> obstacle_radii;
  std::vector<Vec2> other_hunters;
  std::optional<Vec2> target;
};

struct RewardBreakdown {
  double encirclement = 0.0;
  double collision = 0.0;
  double covert = 0.0;
  double total = 0.0;
  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

struct StepResult {
  WorldState world;
  std::vector<RewardBreakdown> rewards;
  EpisodeStatus status = EpisodeStatus::kRunning;
  covert::DetectionSnapshot snapshot;
  std::vector<bool> collisions;
  MotionCommand target_action;
};

WorldState reset(const EnvConfig& cfg);

Observation observe(const WorldState& world, int agent, const EnvConfig& cfg);

/// Variance of the M hunter-to-target distances.
double distance_variance(const WorldState& world);
/// Distance from the hunters' centroid to the target.
double centroid_distance(const WorldState& world);
/// Hunter-to-target distances in hunter order.
std::vector<double> target_distances(const WorldState& world);

double reward_encirclement(const WorldState& world, const EpisodeConfig& cfg);
double reward_collision(bool collided, const EpisodeConfig& cfg);
double reward_covert(double kl, double epsilon, const EpisodeConfig& cfg);

/// Potential-field flee: 1/d^2 repulsion from hunters, obstacles and walls.
MotionCommand evader_policy(const WorldState& world, const EnvConfig& cfg, Rng& rng);

/// Covert audit of the closest (maximum exposure) hunter-target link.
covert::DetectionSnapshot audit_link(const WorldState& world, const EnvConfig& cfg);

/// Terminal test for a world whose step counter has already advanced.
EpisodeStatus classify(const WorldState& world, const EpisodeConfig& cfg);

StepResult step(const WorldState& world, std::span<const HunterAction> actions,
                const EnvConfig& cfg);

}  // namespace auvhunt::env
