#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace stepstream {

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/// Planar pose: position in meters, yaw in radians, yaw kept in (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double yaw_) : x(x_), y(y_), yaw(normalize_angle(yaw_)) {}

  Eigen::Vector2d position() const { return {x, y}; }

  /// Maps a pose expressed in this frame into the parent frame.
  Pose2 compose(const Pose2& local) const;
  Pose2 inverse() const;

  /// Maps a point expressed in this frame into the parent frame.
  Eigen::Vector2d transform_point(const Eigen::Vector2d& local) const;
  Eigen::Vector2d inverse_transform_point(const Eigen::Vector2d& parent) const;
};

/// Rigid 3D transform. The rotation is stored as a matrix and kept orthonormal by
/// the constructors below.
struct Pose3 {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  Pose3() = default;
  Pose3(const Eigen::Vector3d& p, const Eigen::Matrix3d& r) : position(p), rotation(r) {}

  static Pose3 from_xyz_yaw(double x, double y, double z, double yaw);
  static Pose3 from_quaternion(const Eigen::Vector3d& p, const Eigen::Quaterniond& q);

  /// Heading of the body x axis projected onto the horizontal plane.
  double yaw() const;
  Eigen::Vector3d transform_point(const Eigen::Vector3d& local) const {
    return rotation * local + position;
  }
  /// Yaw-only planar projection.
  Pose2 planar() const { return {position.x(), position.y(), yaw()}; }
};

enum class FootSide { Left, Right };

constexpr FootSide opposite(FootSide side) {
  return side == FootSide::Left ? FootSide::Right : FootSide::Left;
}
/// +1 for Left, -1 for Right (the stance frame has +y to the robot's left).
constexpr double lateral_sign(FootSide side) { return side == FootSide::Left ? 1.0 : -1.0; }

std::string_view to_string(FootSide side);
/// Accepts "left"/"right" (case-insensitive first letter also accepted: "L", "R").
FootSide foot_side_from_string(std::string_view text);

struct SafetyLimits {
  double max_stride = 0.60;
  double max_yaw = 0.6;
  double min_lateral_separation = 0.20;
  double max_inward_yaw = 0.1;

  /// Throws std::invalid_argument unless every field is strictly positive.
  void validate() const;
};

/// Expresses a world pose in the frame of `stance`.
Pose2 transform_to_stance_frame(const Pose2& point, const Pose2& stance);

/// Nominal landing spot of the swing foot with zero stride: beside the stance
/// foot at the minimum lateral separation.
Eigen::Vector2d swing_home_position(FootSide side, const SafetyLimits& limits);

/// Projects a stance-frame footstep candidate onto the feasible set.
///
/// Applied in order: the lateral half-plane (a Left foot lands at
/// y >= +min_lateral_separation, a Right foot at y <= -min_lateral_separation),
/// then the stride bound (distance from the swing home position <= max_stride,
/// scaled toward home), then the relative yaw bound [-max_yaw, max_yaw] with
/// inward rotation further limited to max_inward_yaw.
Pose2 clamp_footstep(const Pose2& candidate, FootSide side, const SafetyLimits& limits);

/// Predicate form of the limits enforced by clamp_footstep.
bool satisfies_limits(const Pose2& candidate, FootSide side, const SafetyLimits& limits);

}  // namespace stepstream
