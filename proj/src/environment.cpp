#include "auvhunt/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "auvhunt/errors.hpp"

namespace auvhunt::env {

namespace {

using kinematics::distance;
using kinematics::Pose2;

constexpr int kMaxPlacementRetries = 10000;

bool same_obstacles(const std::vector<Obstacle>& a, const std::vector<Obstacle>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                    [](const Obstacle& x, const Obstacle& y) {
                      return x.center == y.center && x.radius == y.radius;
                    });
}

bool same_body(const std::vector<kinematics::BodyVelocity>& a,
               const std::vector<kinematics::BodyVelocity>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                    [](const auto& x, const auto& y) {
                      return x.surge == y.surge && x.sway == y.sway &&
                             x.yaw_rate == y.yaw_rate;
                    });
}

bool hunter_position_valid(const WorldState& world, std::size_t self, Vec2 p,
                           double r_min) {
  for (std::size_t j = 0; j < world.hunters.size(); ++j) {
    if (j != self && distance(p, world.hunters[j].pose.position()) < r_min) {
      return false;
    }
  }
  for (const auto& o : world.obstacles) {
    if (distance(p, o.center) < o.radius) return false;
  }
  return true;
}

bool target_position_valid(const WorldState& world, Vec2 p) {
  for (const auto& o : world.obstacles) {
    if (distance(p, o.center) < o.radius) return false;
  }
  return true;
}

/// Moves along the segment from `from` to `to` as far as `valid` allows.
/// Returns the fraction travelled; 1 means unobstructed.
template <typename Valid>
double advance_until_contact(Vec2 from, Vec2 to, Valid valid) {
  if (valid(to)) return 1.0;
  if (!valid(from)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (valid(from + mid * (to - from)) ? lo : hi) = mid;
  }
  return lo;
}

AgentState propagate(const AgentState& state, kinematics::BodyVelocity& body,
                     const MotionCommand& cmd,
                     const kinematics::MotionLimits& limits,
                     const WorldConfig& cfg) {
  if (cfg.dynamics == DynamicsMode::kKinematic) {
    return kinematics::step_agent(state, cmd, cfg.dt, limits, cfg.current);
  }
  kinematics::DynamicState dyn{state.pose, body};
  const auto control = kinematics::track_command(dyn, cfg.hydro, cmd, cfg.tracking_gain);
  auto next = kinematics::step_full_dynamics(dyn, cfg.hydro, control, cfg.dt, limits);
  next.eta.x += cfg.current.x * cfg.dt;
  next.eta.y += cfg.current.y * cfg.dt;
  body = next.nu;
  return {next.eta, std::hypot(next.nu.surge, next.nu.sway)};
}

}  // namespace

void EpisodeConfig::validate() const {
  if (m_hunters < 2) throw ValidationError("episode.m_hunters must be >= 2");
  if (!(r1 > 0.0 && r2 > 0.0 && d_g_star > 0.0)) {
    throw ValidationError("episode radii must be positive");
  }
  if (!(r2 < r1)) throw ValidationError("episode.r2 must be < episode.r1");
  if (!(d_g_star <= r2)) throw ValidationError("episode.d_g_star must be <= episode.r2");
  if (h_max_steps < 1) throw ValidationError("episode.h_max_steps must be >= 1");
  if (!(weights.lambda > 0.0 && weights.zeta > 0.0 && weights.nu > 0.0)) {
    throw ValidationError("episode reward weights must be positive");
  }
}

void WorldConfig::validate() const {
  arena.validate();
  hunter_limits.validate();
  target_limits.validate();
  if (!(hunter_limits.a_max < target_limits.a_max)) {
    throw ValidationError("world.hunter_limits.a_max must be < world.target_limits.a_max");
  }
  if (!arena.contains(start)) throw ValidationError("world.start must lie inside the arena");
  if (!(dt > 0.0)) throw ValidationError("world.dt must be positive");
  if (obstacle_count < 0) throw ValidationError("world.obstacle_count must be >= 0");
  if (!(obstacle_radius_min > 0.0 && obstacle_radius_min <= obstacle_radius_max)) {
    throw ValidationError("world.obstacle_radius_min/max must satisfy 0 < min <= max");
  }
  if (2.0 * obstacle_radius_max >= std::min(arena.width, arena.height)) {
    throw ValidationError("world.obstacle_radius_max does not fit inside the arena");
  }
  if (!(min_link_distance_m > 0.0)) {
    throw ValidationError("world.min_link_distance_m must be positive");
  }
  channel.validate();
  covert.validate();
  if (!(reference_scale >= 0.0)) throw ValidationError("world.reference_scale must be >= 0");
}

double WorldConfig::ambient_noise_w() const {
  return acoustics::ambient_noise_watts(channel, reference_scale);
}

void EnvConfig::validate() const {
  world.validate();
  episode.validate();
}

std::string_view to_string(EpisodeStatus status) {
  switch (status) {
    case EpisodeStatus::kRunning: return "running";
    case EpisodeStatus::kSuccess: return "success";
    case EpisodeStatus::kFailureTimeout: return "failure_timeout";
    case EpisodeStatus::kFailureNeverDetected: return "failure_never_detected";
  }
  return "unknown";
}

bool is_terminal(EpisodeStatus status) { return status != EpisodeStatus::kRunning; }

bool operator==(const WorldState& a, const WorldState& b) {
  return a.hunters == b.hunters && a.target == b.target &&
         same_obstacles(a.obstacles, b.obstacles) &&
         same_body(a.hunter_body, b.hunter_body) &&
         same_body({a.target_body}, {b.target_body}) &&
         a.step_index == b.step_index && a.target_detected == b.target_detected &&
         a.status == b.status;
}

WorldState reset(const EnvConfig& cfg) {
  cfg.validate();
  const auto& w = cfg.world;
  const int m = cfg.episode.m_hunters;
  Rng rng(derive_seed(cfg.episode.seed, "reset"));

  WorldState world;
  const double r_min = w.arena.r_min;
  const double ring = std::max(2.0 * r_min, 1.5 * r_min / (2.0 * std::sin(std::numbers::pi / m)));
  for (int i = 0; i < m; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / m;
    Vec2 p = w.arena.clamp(w.start + ring * Vec2{std::cos(angle), std::sin(angle)});
    world.hunters.push_back({Pose2{p.x, p.y, 0.0}, 0.0});
  }
  world.hunter_body.assign(m, {});

  std::uniform_real_distribution<double> radius_dist(w.obstacle_radius_min,
                                                     w.obstacle_radius_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < w.obstacle_count; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementRetries && !placed; ++attempt) {
      const double r = radius_dist(rng);
      const Vec2 c{r + unit(rng) * (w.arena.width - 2 * r),
                   r + unit(rng) * (w.arena.height - 2 * r)};
      if (distance(c, w.start) < ring + r + 3.0 * r_min) continue;
      const bool overlaps = std::any_of(
          world.obstacles.begin(), world.obstacles.end(), [&](const Obstacle& o) {
            return distance(c, o.center) < o.radius + r + 2.0 * r_min;
          });
      if (overlaps) continue;
      world.obstacles.push_back({c, r});
      placed = true;
    }
    if (!placed) {
      throw Error("reset: could not place obstacle " + std::to_string(k) +
                  " after bounded retries");
    }
  }

  bool placed = false;
  for (int attempt = 0; attempt < kMaxPlacementRetries && !placed; ++attempt) {
    const Vec2 p{unit(rng) * w.arena.width, unit(rng) * w.arena.height};
    const bool near_hunter = std::any_of(
        world.hunters.begin(), world.hunters.end(), [&](const AgentState& h) {
          return distance(p, h.pose.position()) < cfg.episode.r2;
        });
    const bool in_obstacle = std::any_of(
        world.obstacles.begin(), world.obstacles.end(),
        [&](const Obstacle& o) { return distance(p, o.center) < o.radius + r_min; });
    if (near_hunter || in_obstacle) continue;
    const double heading = (2.0 * unit(rng) - 1.0) * std::numbers::pi;
    world.target = {Pose2{p.x, p.y, heading}, 0.0};
    placed = true;
  }
  if (!placed) throw Error("reset: could not place target after bounded retries");

  const auto d = target_distances(world);
  world.target_detected =
      std::any_of(d.begin(), d.end(), [&](double x) { return x < cfg.episode.r1; });
  return world;
}

Observation observe(const WorldState& world, int agent, const EnvConfig& cfg) {
  if (agent < 0 || agent >= static_cast<int>(world.hunters.size())) {
    throw ValidationError("observe: agent index out of range");
  }
  Observation obs;
  const auto& self = world.hunters[agent];
  obs.own_speed = self.speed;
  obs.own_pose = self.pose;
  for (const auto& o : world.obstacles) {
    obs.obstacle_positions.push_back(o.center);
    obs.obstacle_radii.push_back(o.radius);
  }
  for (std::size_t j = 0; j < world.hunters.size(); ++j) {
    if (static_cast<int>(j) != agent) {
      obs.other_hunters.push_back(world.hunters[j].pose.position());
    }
  }
  const auto d = target_distances(world);
  const bool in_range =
      std::any_of(d.begin(), d.end(), [&](double x) { return x < cfg.episode.r1; });
  if (world.target_detected || in_range) obs.target = world.target.pose.position();
  return obs;
}

double distance_variance(const WorldState& world) {
  const auto d = target_distances(world);
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / d.size();
  double var = 0.0;
  for (double x : d) var += (x - mean) * (x - mean);
  return var / d.size();
}

std::vector<double> target_distances(const WorldState& world) {
  std::vector<double> d;
  d.reserve(world.hunters.size());
  for (const auto& h : world.hunters) {
    d.push_back(distance(h.pose.position(), world.target.pose.position()));
  }
  return d;
}

double centroid_distance(const WorldState& world) {
  Vec2 c{};
  for (const auto& h : world.hunters) c = c + h.pose.position();
  c = (1.0 / world.hunters.size()) * c;
  return distance(c, world.target.pose.position());
}

double reward_encirclement(const WorldState& world, const EpisodeConfig& cfg) {
  const double sigma = distance_variance(world);
  const double dg = centroid_distance(world);
  double reward = -cfg.weights.lambda * sigma;
  if (dg <= cfg.d_g_star) reward += cfg.weights.zeta * (cfg.d_g_star - dg);
  return reward;
}

double reward_collision(bool collided, const EpisodeConfig& cfg) {
  return collided ? -cfg.weights.nu : 0.0;
}

double reward_covert(double kl, double epsilon, const EpisodeConfig& cfg) {
  return covert::is_covert(kl, epsilon) ? cfg.weights.nu : -cfg.weights.nu;
}

MotionCommand evader_policy(const WorldState& world, const EnvConfig& cfg, Rng& rng) {
  const auto& w = cfg.world;
  const Vec2 p = world.target.pose.position();
  Vec2 force{};
  auto push = [&](Vec2 away, double dist, double gain) {
    const double d = std::max(dist, 1.0);
    force = force + (gain / (d * d * std::max(kinematics::norm(away), 1e-12))) * away;
  };
  for (const auto& h : world.hunters) {
    const Vec2 away = p - h.pose.position();
    push(away, kinematics::norm(away), w.evader.hunter_gain);
  }
  for (const auto& o : world.obstacles) {
    const Vec2 away = p - o.center;
    push(away, kinematics::norm(away) - o.radius, w.evader.obstacle_gain);
  }
  push({1.0, 0.0}, p.x, w.evader.wall_gain);
  push({-1.0, 0.0}, w.arena.width - p.x, w.evader.wall_gain);
  push({0.0, 1.0}, p.y, w.evader.wall_gain);
  push({0.0, -1.0}, w.arena.height - p.y, w.evader.wall_gain);

  if (kinematics::norm(force) < 1e-15) return {world.target.pose.psi, 0.0};
  double heading = std::atan2(force.y, force.x);
  if (w.evader.heading_noise > 0.0) {
    std::normal_distribution<double> noise(0.0, w.evader.heading_noise);
    heading = kinematics::wrap_angle(heading + noise(rng));
  }
  return {heading, w.target_limits.v_max};
}

covert::DetectionSnapshot audit_link(const WorldState& world, const EnvConfig& cfg) {
  const auto d = target_distances(world);
  const double closest = *std::min_element(d.begin(), d.end());
  return covert::evaluate_link(closest, cfg.world.covert, cfg.world.channel,
                               cfg.world.ambient_noise_w(),
                               cfg.world.min_link_distance_m);
}

EpisodeStatus classify(const WorldState& world, const EpisodeConfig& cfg) {
  const auto d = target_distances(world);
  if (std::all_of(d.begin(), d.end(), [&](double x) { return x < cfg.r2; })) {
    return EpisodeStatus::kSuccess;
  }
  if (world.step_index >= cfg.h_max_steps) {
    const bool all_far =
        std::all_of(d.begin(), d.end(), [&](double x) { return x > cfg.r1; });
    return all_far ? EpisodeStatus::kFailureNeverDetected
                   : EpisodeStatus::kFailureTimeout;
  }
  return EpisodeStatus::kRunning;
}

StepResult step(const WorldState& world, std::span<const HunterAction> actions,
                const EnvConfig& cfg) {
  if (is_terminal(world.status)) {
    throw ValidationError("step: episode already terminated (" +
                          std::string(to_string(world.status)) + ")");
  }
  if (actions.size() != world.hunters.size()) {
    throw ValidationError("step: expected " + std::to_string(world.hunters.size()) +
                          " actions, got " + std::to_string(actions.size()));
  }
  const auto& w = cfg.world;
  Rng rng(derive_seed(cfg.episode.seed, "evader", world.step_index));

  StepResult result;
  result.target_action = evader_policy(world, cfg, rng);
  WorldState next = world;
  result.collisions.assign(world.hunters.size(), false);

  for (std::size_t i = 0; i < next.hunters.size(); ++i) {
    const AgentState before = next.hunters[i];
    AgentState after = propagate(before, next.hunter_body[i], actions[i],
                                 w.hunter_limits, w);
    const Vec2 from = before.pose.position();
    const Vec2 to = w.arena.clamp(after.pose.position());
    const double fraction = advance_until_contact(from, to, [&](Vec2 p) {
      return hunter_position_valid(next, i, p, w.arena.r_min);
    });
    const Vec2 reached = from + fraction * (to - from);
    after.pose.x = reached.x;
    after.pose.y = reached.y;
    if (fraction < 1.0) {
      after.speed = 0.0;
      next.hunter_body[i] = {};
      result.collisions[i] = true;
    }
    next.hunters[i] = after;
  }

  {
    const AgentState before = next.target;
    AgentState after = propagate(before, next.target_body, result.target_action,
                                 w.target_limits, w);
    const Vec2 from = before.pose.position();
    const Vec2 to = w.arena.clamp(after.pose.position());
    const double fraction = advance_until_contact(
        from, to, [&](Vec2 p) { return target_position_valid(next, p); });
    const Vec2 reached = from + fraction * (to - from);
    after.pose.x = reached.x;
    after.pose.y = reached.y;
    if (fraction < 1.0) {
      after.speed = 0.0;
      next.target_body = {};
    }
    next.target = after;
  }

  next.step_index = world.step_index + 1;
  const auto d = target_distances(next);
  if (std::any_of(d.begin(), d.end(), [&](double x) { return x < cfg.episode.r1; })) {
    next.target_detected = true;
  }

  result.snapshot = audit_link(next, cfg);
  const bool any_collision = std::find(result.collisions.begin(),
                                       result.collisions.end(), true) !=
                             result.collisions.end();
  RewardBreakdown shared;
  shared.encirclement = reward_encirclement(next, cfg.episode);
  shared.collision = reward_collision(any_collision, cfg.episode);
  shared.covert = reward_covert(result.snapshot.kl, w.covert.epsilon, cfg.episode);
  shared.total = shared.encirclement + shared.collision + shared.covert;
  result.rewards.assign(next.hunters.size(), shared);

  next.status = classify(next, cfg.episode);
  result.status = next.status;
  result.world = std::move(next);
  return result;
}

}  // namespace auvhunt::env
