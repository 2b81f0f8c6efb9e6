#include "auvhunt/behavior.hpp"

#include <cmath>
#include <random>
#include <string>

#include "auvhunt/errors.hpp"

namespace auvhunt::behavior {

namespace {

using kinematics::Vec2;

double bearing(Vec2 from, Vec2 to) { return std::atan2(to.y - from.y, to.x - from.x); }

/// Bends a goal heading around nearby obstacles (tangential slide) and away
/// from teammates closer than the avoidance radius.
double avoid(const env::Observation& obs, const env::EnvConfig& cfg,
             const BehaviorParams& params, double goal_heading) {
  const Vec2 self = obs.own_pose.position();
  const Vec2 goal{std::cos(goal_heading), std::sin(goal_heading)};
  Vec2 steer = goal;
  for (std::size_t k = 0; k < obs.obstacle_positions.size(); ++k) {
    const Vec2 away = self - obs.obstacle_positions[k];
    const double d = kinematics::norm(away);
    const double clearance = d - obs.obstacle_radii[k];
    if (clearance >= params.obstacle_influence || d < 1e-9) continue;
    const Vec2 n = (1.0 / d) * away;
    if (n.x * goal.x + n.y * goal.y > 0.0) continue;  // already moving away
    Vec2 t{-n.y, n.x};
    if (t.x * goal.x + t.y * goal.y < 0.0) t = -1.0 * t;
    const double strength = 1.0 - std::max(clearance, 0.0) / params.obstacle_influence;
    steer = steer + (2.0 * strength) * (t + 0.5 * n);
  }
  const double personal = params.teammate_spacing * cfg.world.arena.r_min;
  for (Vec2 mate : obs.other_hunters) {
    const Vec2 away = self - mate;
    const double d = kinematics::norm(away);
    if (d >= personal || d < 1e-9) continue;
    steer = steer + (1.0 - d / personal) * ((1.0 / d) * away);
  }
  if (kinematics::norm(steer) < 1e-12) return goal_heading;
  return std::atan2(steer.y, steer.x);
}

env::HunterAction search(const env::Observation& obs, int agent, const env::EnvConfig& cfg) {
  const auto& a = cfg.world.arena;
  const std::array<Vec2, 4> corners{Vec2{a.width, a.height}, Vec2{0.0, a.height},
                                    Vec2{0.0, 0.0}, Vec2{a.width, 0.0}};
  return {bearing(obs.own_pose.position(), corners[agent % 4]),
          cfg.world.hunter_limits.v_max};
}

env::HunterAction pursue(const env::Observation& obs, int agent, const env::EnvConfig& cfg) {
  if (!obs.target) return search(obs, agent, cfg);
  return {bearing(obs.own_pose.position(), *obs.target), cfg.world.hunter_limits.v_max};
}

env::HunterAction encircle(const env::Observation& obs, int agent,
                           const env::EnvConfig& cfg, const BehaviorParams& params) {
  if (!obs.target) return search(obs, agent, cfg);
  const Vec2 self = obs.own_pose.position();
  Vec2 centroid = self;
  for (Vec2 p : obs.other_hunters) centroid = centroid + p;
  centroid = (1.0 / (obs.other_hunters.size() + 1)) * centroid;

  const int m = static_cast<int>(obs.other_hunters.size()) + 1;
  const double base = bearing(*obs.target, centroid);
  const double slot_angle = base + 2.0 * std::numbers::pi * agent / m;
  const Vec2 slot = *obs.target + params.encircle_radius *
                                      Vec2{std::cos(slot_angle), std::sin(slot_angle)};
  const double gap = kinematics::distance(self, slot);
  const double v = std::min(cfg.world.hunter_limits.v_max, gap / cfg.world.dt);
  return {bearing(self, slot), v};
}

}  // namespace

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::kPursuit: return "pursuit";
    case Policy::kEncircle: return "encircle";
    case Policy::kNoisyPursuit: return "noisy";
  }
  return "unknown";
}

Policy policy_from_string(std::string_view name) {
  if (name == "pursuit") return Policy::kPursuit;
  if (name == "encircle") return Policy::kEncircle;
  if (name == "noisy") return Policy::kNoisyPursuit;
  throw ValidationError("unknown behavior policy '" + std::string(name) +
                        "' (expected pursuit|encircle|noisy)");
}

env::HunterAction act(Policy policy, const env::Observation& obs, int agent,
                      const env::EnvConfig& cfg, const BehaviorParams& params,
                      Rng& rng) {
  env::HunterAction action;
  switch (policy) {
    case Policy::kPursuit:
      action = pursue(obs, agent, cfg);
      break;
    case Policy::kEncircle:
      action = encircle(obs, agent, cfg, params);
      break;
    case Policy::kNoisyPursuit: {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double roll = unit(rng);
      const double heading = (2.0 * unit(rng) - 1.0) * std::numbers::pi;
      // Random headings skip avoidance: these are the deliberately poor steps.
      if (roll < params.noise_prob) return {heading, cfg.world.hunter_limits.v_max};
      action = pursue(obs, agent, cfg);
      break;
    }
  }
  action.theta = avoid(obs, cfg, params, action.theta);
  return action;
}

}  // namespace auvhunt::behavior
