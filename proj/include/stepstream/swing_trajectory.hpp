#pragma once

#include <Eigen/Dense>

#include <array>
#include <utility>

namespace stepstream {

struct SwingSpec {
  Eigen::Vector3d initial = Eigen::Vector3d::Zero();
  Eigen::Vector3d goal = Eigen::Vector3d::Zero();
  double swing_height = 0.1;
  double alpha_wp1 = 0.15;
  double alpha_wp2 = 0.85;
  double duration = 0.65;
  /// Height change above which a swing counts as stepping up or down.
  double height_threshold = 0.01;
  double initial_yaw = 0.0;
  double goal_yaw = 0.0;

  /// Throws std::invalid_argument when the proportions or durations are invalid.
  void validate() const;
};

struct SwingWaypoints {
  Eigen::Vector3d first;
  Eigen::Vector3d second;
  /// Second waypoint sits below the goal (large step-ups).
  bool below_goal_warning = false;
};

/// Two intermediate waypoints: XY by linear interpolation at alpha_wp1/alpha_wp2,
/// Z raised by swing_height and shifted toward the goal height on step-up
/// (first waypoint) or step-down (second waypoint).
SwingWaypoints compute_waypoints(const SwingSpec& spec);

struct SwingState {
  Eigen::Vector3d position;
  Eigen::Vector3d velocity;
  double yaw = 0.0;
  /// Requested time was outside [0, duration] and has been clamped.
  bool clamped = false;
};

/// Clamped cubic spline through initial, waypoints and goal at times
/// 0, alpha_wp1 T, alpha_wp2 T, T, with zero velocity at both ends.
class SwingTrajectory {
 public:
  static constexpr std::size_t kKnots = 4;

  SwingTrajectory(const SwingSpec& spec, const SwingWaypoints& waypoints);

  double duration() const { return times_.back(); }
  const std::array<double, kKnots>& knot_times() const { return times_; }
  const std::array<Eigen::Vector3d, kKnots>& knots() const { return points_; }
  const std::array<Eigen::Vector3d, kKnots>& knot_velocities() const { return velocities_; }
  bool warning() const { return warning_; }

  /// Throws std::invalid_argument for NaN time.
  SwingState sample(double t) const;
  /// Velocity at an interior knot approached from the segment on the given side.
  Eigen::Vector3d knot_velocity_from(std::size_t knot, bool from_left) const;

 private:
  Eigen::Vector3d segment_velocity(std::size_t segment, double t) const;

  std::array<double, kKnots> times_{};
  std::array<Eigen::Vector3d, kKnots> points_;
  std::array<Eigen::Vector3d, kKnots> velocities_;
  double initial_yaw_ = 0.0;
  double goal_yaw_ = 0.0;
  bool warning_ = false;
};

SwingTrajectory build_spline(const SwingSpec& spec, const SwingWaypoints& waypoints);

}  // namespace stepstream
