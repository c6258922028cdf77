#include "stepstream/swing_trajectory.hpp"

#include "stepstream/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace stepstream {

void SwingSpec::validate() const {
  if (!(alpha_wp1 > 0 && alpha_wp1 < alpha_wp2 && alpha_wp2 < 1)) {
    throw std::invalid_argument("waypoint proportions must satisfy 0 < alpha_wp1 < alpha_wp2 < 1");
  }
  if (std::abs(alpha_wp1 + alpha_wp2 - 1.0) > 1e-12) {
    throw std::invalid_argument("waypoint proportions must sum to 1");
  }
  if (!(swing_height > 0)) throw std::invalid_argument("swing height must be positive");
  if (!(duration > 0)) throw std::invalid_argument("swing duration must be positive");
  if (!(height_threshold >= 0)) throw std::invalid_argument("height threshold must be non-negative");
}

SwingWaypoints compute_waypoints(const SwingSpec& spec) {
  spec.validate();
  const double z0 = spec.initial.z(), zg = spec.goal.z();
  const double up = (zg - z0 > spec.height_threshold) ? 1.0 : 0.0;
  const double down = (z0 - zg > spec.height_threshold) ? 1.0 : 0.0;

  SwingWaypoints wp;
  wp.first.head<2>() = (1.0 - spec.alpha_wp1) * spec.initial.head<2>() + spec.alpha_wp1 * spec.goal.head<2>();
  wp.second.head<2>() = (1.0 - spec.alpha_wp2) * spec.initial.head<2>() + spec.alpha_wp2 * spec.goal.head<2>();
  wp.first.z() = spec.swing_height + (1.0 - up * spec.alpha_wp1) * z0 + up * spec.alpha_wp1 * zg;
  wp.second.z() = spec.swing_height + (1.0 - down * spec.alpha_wp2) * z0 + down * spec.alpha_wp2 * zg;
  wp.below_goal_warning = wp.second.z() < zg;
  return wp;
}

SwingTrajectory::SwingTrajectory(const SwingSpec& spec, const SwingWaypoints& waypoints)
    : initial_yaw_(spec.initial_yaw), goal_yaw_(spec.goal_yaw), warning_(waypoints.below_goal_warning) {
  spec.validate();
  times_ = {0.0, spec.alpha_wp1 * spec.duration, spec.alpha_wp2 * spec.duration, spec.duration};
  points_ = {spec.initial, waypoints.first, waypoints.second, spec.goal};

  // Interior velocities from second-derivative continuity with v0 = v3 = 0.
  const double h0 = times_[1] - times_[0], h1 = times_[2] - times_[1], h2 = times_[3] - times_[2];
  const Eigen::Vector3d s0 = (points_[1] - points_[0]) / h0;
  const Eigen::Vector3d s1 = (points_[2] - points_[1]) / h1;
  const Eigen::Vector3d s2 = (points_[3] - points_[2]) / h2;
  const double a11 = 2.0 * (h0 + h1), a12 = h0;
  const double a21 = h2, a22 = 2.0 * (h1 + h2);
  const Eigen::Vector3d r1 = 3.0 * (h1 * s0 + h0 * s1);
  const Eigen::Vector3d r2 = 3.0 * (h2 * s1 + h1 * s2);
  const double det = a11 * a22 - a12 * a21;

  velocities_[0] = Eigen::Vector3d::Zero();
  velocities_[1] = (a22 * r1 - a12 * r2) / det;
  velocities_[2] = (a11 * r2 - a21 * r1) / det;
  velocities_[3] = Eigen::Vector3d::Zero();
}

namespace {

struct Hermite {
  double h00, h10, h01, h11;     // position basis
  double d00, d10, d01, d11;     // derivative basis (per unit s)
};

Hermite hermite_basis(double s) {
  const double s2 = s * s, s3 = s2 * s;
  return {2 * s3 - 3 * s2 + 1, s3 - 2 * s2 + s, -2 * s3 + 3 * s2, s3 - s2,
          6 * s2 - 6 * s,      3 * s2 - 4 * s + 1, -6 * s2 + 6 * s, 3 * s2 - 2 * s};
}

}  // namespace

Eigen::Vector3d SwingTrajectory::segment_velocity(std::size_t seg, double t) const {
  const double h = times_[seg + 1] - times_[seg];
  const Hermite b = hermite_basis((t - times_[seg]) / h);
  return (b.d00 * points_[seg] + b.d10 * h * velocities_[seg] + b.d01 * points_[seg + 1] +
          b.d11 * h * velocities_[seg + 1]) /
         h;
}

Eigen::Vector3d SwingTrajectory::knot_velocity_from(std::size_t knot, bool from_left) const {
  if (knot == 0 || knot + 1 >= kKnots) throw std::out_of_range("not an interior knot");
  return from_left ? segment_velocity(knot - 1, times_[knot]) : segment_velocity(knot, times_[knot]);
}

SwingState SwingTrajectory::sample(double t) const {
  if (std::isnan(t)) throw std::invalid_argument("swing sample time is NaN");
  SwingState state;
  if (t < 0.0 || t > duration()) {
    state.clamped = true;
    t = t < 0.0 ? 0.0 : duration();
  }

  std::size_t seg = 0;
  while (seg + 2 < kKnots && t > times_[seg + 1]) ++seg;
  const double h = times_[seg + 1] - times_[seg];
  const Hermite b = hermite_basis((t - times_[seg]) / h);
  state.position = b.h00 * points_[seg] + b.h10 * h * velocities_[seg] + b.h01 * points_[seg + 1] +
                   b.h11 * h * velocities_[seg + 1];
  state.velocity = (b.d00 * points_[seg] + b.d10 * h * velocities_[seg] + b.d01 * points_[seg + 1] +
                    b.d11 * h * velocities_[seg + 1]) /
                   h;
  state.yaw = normalize_angle(initial_yaw_ + (t / duration()) * normalize_angle(goal_yaw_ - initial_yaw_));
  return state;
}

SwingTrajectory build_spline(const SwingSpec& spec, const SwingWaypoints& waypoints) {
  return SwingTrajectory(spec, waypoints);
}

}  // namespace stepstream
