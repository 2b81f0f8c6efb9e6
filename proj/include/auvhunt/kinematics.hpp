#pragma once

#include <array>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace auvhunt::kinematics {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double norm(Vec2 v);
double distance(Vec2 a, Vec2 b);

/// Wraps an angle into [-pi, pi].
double wrap_angle(double angle);

/// Planar pose; depth is an arena-wide constant.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose2&, const Pose2&) = default;
};

struct BodyVelocity {
  double surge = 0.0;
  double sway = 0.0;
  double yaw_rate = 0.0;
};

struct EarthVelocity {
  double vx = 0.0;
  double vy = 0.0;
  double yaw_rate = 0.0;
};

struct MotionLimits {
  double v_max = 0.3;
  double a_max = 0.01;
  double yaw_rate_max = std::numbers::pi / 40.0;

  void validate() const;
};

struct Obstacle {
  Vec2 center;
  double radius = 0.0;
};

struct Arena {
  double width = 1200.0;
  double height = 1200.0;
  double depth_z = -200.0;
  double r_min = 10.0;

  void validate() const;
  bool contains(Vec2 p) const;
  Vec2 clamp(Vec2 p) const;
  double diagonal() const;
};

/// Heading/speed command: move along `theta` at speed `v`.
struct MotionCommand {
  double theta = 0.0;
  double v = 0.0;
};

struct AgentState {
  Pose2 pose;
  double speed = 0.0;
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Rotates a body-frame velocity into the earth frame.
EarthVelocity body_to_earth(const BodyVelocity& v, double psi);

/// Advances one agent by `dt` seconds under the acceleration- and
/// turn-rate-limited unicycle model.
///
/// The commanded speed is clamped to [0, v_max]; the realized speed change is
/// limited to a_max*dt and the heading change to yaw_rate_max*dt. Position
/// advances along the new heading by the mean of old and new speed times dt
/// (the accel-limited trapezoid), plus `current * dt` for an optional
/// earth-frame current. Throws ValidationError on non-finite commands or dt <= 0.
AgentState step_agent(const AgentState& state, const MotionCommand& action,
                      double dt, const MotionLimits& limits,
                      Vec2 current = {});

/// Flag i is set iff agent i is closer than r_min to another agent or strictly
/// inside an obstacle.
std::vector<bool> check_separation(std::span<const Pose2> poses,
                                   std::span<const Obstacle> obstacles,
                                   double r_min);

/// Constant hydrodynamic matrices for the optional 3-DOF model
/// M v' + C v + D v + g = p + e. Row-major 3x3.
struct HydrodynamicModel {
  std::array<double, 9> mass{1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::array<double, 9> coriolis{};
  std::array<double, 9> damping{};
  std::array<double, 3> restoring{};
};

struct DynamicState {
  Pose2 eta;
  BodyVelocity nu;
};

/// One explicit-Euler step of the 3-DOF model. Body speed is saturated at
/// v_max afterwards and the body acceleration norm at a_max.
DynamicState step_full_dynamics(const DynamicState& state,
                                const HydrodynamicModel& model,
                                const std::array<double, 3>& control,
                                double dt, const MotionLimits& limits,
                                const std::array<double, 3>& disturbance = {});

/// Control input that drives the 3-DOF model toward a heading/speed command
/// (feedback-linearizing proportional law with gain `gain` in 1/s).
std::array<double, 3> track_command(const DynamicState& state,
                                    const HydrodynamicModel& model,
                                    const MotionCommand& command, double gain);

}  // namespace auvhunt::kinematics
