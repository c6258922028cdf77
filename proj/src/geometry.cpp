#include "stepstream/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stepstream {

namespace {
// Stride saturation is re-triggered only beyond this slack so that a clamped
// result (norm equal to the bound up to rounding) is a fixed point.
constexpr double kStrideSlack = 1e-12;
}  // namespace

double normalize_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::remainder(angle, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

Pose2 Pose2::compose(const Pose2& local) const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {x + c * local.x - s * local.y, y + s * local.x + c * local.y, yaw + local.yaw};
}

Pose2 Pose2::inverse() const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {-(c * x + s * y), s * x - c * y, -yaw};
}

Eigen::Vector2d Pose2::transform_point(const Eigen::Vector2d& local) const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {x + c * local.x() - s * local.y(), y + s * local.x() + c * local.y()};
}

Eigen::Vector2d Pose2::inverse_transform_point(const Eigen::Vector2d& parent) const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  const double dx = parent.x() - x, dy = parent.y() - y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

Pose3 Pose3::from_xyz_yaw(double x, double y, double z, double yaw) {
  return {Eigen::Vector3d(x, y, z), Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix()};
}

Pose3 Pose3::from_quaternion(const Eigen::Vector3d& p, const Eigen::Quaterniond& q) {
  return {p, q.normalized().toRotationMatrix()};
}

double Pose3::yaw() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

std::string_view to_string(FootSide side) { return side == FootSide::Left ? "left" : "right"; }

FootSide foot_side_from_string(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "left" || lower == "l") return FootSide::Left;
  if (lower == "right" || lower == "r") return FootSide::Right;
  throw std::invalid_argument("unknown foot side '" + std::string(text) + "'");
}

void SafetyLimits::validate() const {
  if (!(max_stride > 0.0 && max_yaw > 0.0 && min_lateral_separation > 0.0 && max_inward_yaw > 0.0)) {
    throw std::invalid_argument("safety limits must be strictly positive");
  }
}

Pose2 transform_to_stance_frame(const Pose2& point, const Pose2& stance) {
  return stance.inverse().compose(point);
}

Eigen::Vector2d swing_home_position(FootSide side, const SafetyLimits& limits) {
  return {0.0, lateral_sign(side) * limits.min_lateral_separation};
}

namespace {

std::pair<double, double> yaw_bounds(FootSide side, const SafetyLimits& limits) {
  // Inward rotation turns the toes toward the stance foot: negative yaw for a
  // Left swing foot, positive for a Right one.
  const double inward = std::min(limits.max_inward_yaw, limits.max_yaw);
  if (side == FootSide::Left) return {-inward, limits.max_yaw};
  return {-limits.max_yaw, inward};
}

}  // namespace

Pose2 clamp_footstep(const Pose2& candidate, FootSide side, const SafetyLimits& limits) {
  const double sign = lateral_sign(side);
  Eigen::Vector2d p = candidate.position();

  if (sign * p.y() < limits.min_lateral_separation) p.y() = sign * limits.min_lateral_separation;

  const Eigen::Vector2d home = swing_home_position(side, limits);
  const Eigen::Vector2d offset = p - home;
  const double stride = offset.norm();
  if (stride > limits.max_stride + kStrideSlack) p = home + offset * (limits.max_stride / stride);

  const auto [lo, hi] = yaw_bounds(side, limits);
  return {p.x(), p.y(), std::clamp(candidate.yaw, lo, hi)};
}

bool satisfies_limits(const Pose2& candidate, FootSide side, const SafetyLimits& limits) {
  const double sign = lateral_sign(side);
  if (sign * candidate.y < limits.min_lateral_separation) return false;
  const Eigen::Vector2d offset = candidate.position() - swing_home_position(side, limits);
  if (offset.norm() > limits.max_stride + kStrideSlack) return false;
  const auto [lo, hi] = yaw_bounds(side, limits);
  return candidate.yaw >= lo && candidate.yaw <= hi;
}

}  // namespace stepstream
