#include "auvhunt/kinematics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "auvhunt/errors.hpp"

namespace auvhunt::kinematics {

namespace {

using Mat3 = Eigen::Matrix<double, 3, 3, Eigen::RowMajor>;

Mat3 as_matrix(const std::array<double, 9>& m) { return Mat3(m.data()); }

Eigen::Vector3d as_vector(const std::array<double, 3>& v) {
  return {v[0], v[1], v[2]};
}

Eigen::Vector3d as_vector(const BodyVelocity& v) {
  return {v.surge, v.sway, v.yaw_rate};
}

}  // namespace

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

double distance(Vec2 a, Vec2 b) { return norm(a - b); }

double wrap_angle(double angle) {
  if (angle >= -std::numbers::pi && angle <= std::numbers::pi) return angle;
  double wrapped = std::remainder(angle, 2.0 * std::numbers::pi);
  // remainder can land on -pi or pi; both are inside the closed range.
  return std::clamp(wrapped, -std::numbers::pi, std::numbers::pi);
}

void MotionLimits::validate() const {
  if (!(v_max > 0.0) || !(a_max > 0.0) || !(yaw_rate_max > 0.0)) {
    throw ValidationError("motion limits must be strictly positive");
  }
}

void Arena::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw ValidationError("arena width and height must be positive");
  }
  if (!(r_min > 0.0)) throw ValidationError("arena r_min must be positive");
}

bool Arena::contains(Vec2 p) const {
  return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
}

Vec2 Arena::clamp(Vec2 p) const {
  return {std::clamp(p.x, 0.0, width), std::clamp(p.y, 0.0, height)};
}

double Arena::diagonal() const { return std::hypot(width, height); }

EarthVelocity body_to_earth(const BodyVelocity& v, double psi) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  return {c * v.surge - s * v.sway, s * v.surge + c * v.sway, v.yaw_rate};
}

AgentState step_agent(const AgentState& state, const MotionCommand& action,
                      double dt, const MotionLimits& limits, Vec2 current) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("step_agent: dt must be positive and finite");
  }
  if (!std::isfinite(action.theta) || !std::isfinite(action.v)) {
    throw ValidationError("step_agent: non-finite action component");
  }

  const double commanded = std::clamp(action.v, 0.0, limits.v_max);
  const double max_dv = limits.a_max * dt;
  const double dv = std::clamp(commanded - state.speed, -max_dv, max_dv);
  const double speed = std::clamp(state.speed + dv, 0.0, limits.v_max);

  const double max_turn = limits.yaw_rate_max * dt;
  const double turn =
      std::clamp(wrap_angle(action.theta - state.pose.psi), -max_turn, max_turn);
  const double psi = wrap_angle(state.pose.psi + turn);

  const double travel = 0.5 * (state.speed + speed) * dt;
  AgentState next;
  next.pose.x = state.pose.x + travel * std::cos(psi) + current.x * dt;
  next.pose.y = state.pose.y + travel * std::sin(psi) + current.y * dt;
  next.pose.psi = psi;
  next.speed = speed;
  return next;
}

std::vector<bool> check_separation(std::span<const Pose2> poses,
                                   std::span<const Obstacle> obstacles,
                                   double r_min) {
  std::vector<bool> flags(poses.size(), false);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    for (std::size_t j = i + 1; j < poses.size(); ++j) {
      if (distance(poses[i].position(), poses[j].position()) < r_min) {
        flags[i] = true;
        flags[j] = true;
      }
    }
    for (const auto& obstacle : obstacles) {
      if (distance(poses[i].position(), obstacle.center) < obstacle.radius) {
        flags[i] = true;
      }
    }
  }
  return flags;
}

DynamicState step_full_dynamics(const DynamicState& state,
                                const HydrodynamicModel& model,
                                const std::array<double, 3>& control,
                                double dt, const MotionLimits& limits,
                                const std::array<double, 3>& disturbance) {
  if (!(dt > 0.0)) throw ValidationError("step_full_dynamics: dt must be positive");
  const Mat3 mass = as_matrix(model.mass);
  if (std::abs(mass.determinant()) < 1e-12) {
    throw ValidationError("step_full_dynamics: singular inertia matrix");
  }
  const Eigen::Vector3d nu = as_vector(state.nu);
  const Eigen::Vector3d forces = as_vector(control) + as_vector(disturbance) -
                                 as_matrix(model.coriolis) * nu -
                                 as_matrix(model.damping) * nu -
                                 as_vector(model.restoring);
  Eigen::Vector3d accel = mass.partialPivLu().solve(forces);

  const double planar_accel = std::hypot(accel[0], accel[1]);
  if (planar_accel > limits.a_max) accel.head<2>() *= limits.a_max / planar_accel;
  accel[2] = std::clamp(accel[2], -limits.yaw_rate_max / dt, limits.yaw_rate_max / dt);

  Eigen::Vector3d next_nu = nu + dt * accel;
  const double speed = std::hypot(next_nu[0], next_nu[1]);
  if (speed > limits.v_max) next_nu.head<2>() *= limits.v_max / speed;
  next_nu[2] = std::clamp(next_nu[2], -limits.yaw_rate_max, limits.yaw_rate_max);

  DynamicState next;
  next.nu = {next_nu[0], next_nu[1], next_nu[2]};
  const EarthVelocity earth = body_to_earth(next.nu, state.eta.psi);
  next.eta.x = state.eta.x + dt * earth.vx;
  next.eta.y = state.eta.y + dt * earth.vy;
  next.eta.psi = wrap_angle(state.eta.psi + dt * earth.yaw_rate);
  return next;
}

std::array<double, 3> track_command(const DynamicState& state,
                                    const HydrodynamicModel& model,
                                    const MotionCommand& command, double gain) {
  const double heading_error = wrap_angle(command.theta - state.eta.psi);
  const Eigen::Vector3d desired{command.v * std::cos(heading_error),
                                command.v * std::sin(heading_error),
                                gain * heading_error};
  const Eigen::Vector3d nu = as_vector(state.nu);
  const Eigen::Vector3d accel = gain * (desired - nu);
  const Eigen::Vector3d p = as_matrix(model.mass) * accel +
                            as_matrix(model.coriolis) * nu +
                            as_matrix(model.damping) * nu +
                            as_vector(model.restoring);
  return {p[0], p[1], p[2]};
}

}  // namespace auvhunt::kinematics
