#include "stepstream/step_retarget.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stepstream {

namespace {
constexpr double kMinDirectionNorm = 1e-6;
constexpr double kMinLiftForLanding = 1e-6;

double horizontal_distance(const Pose3& a, const Pose3& b) {
  return (a.position.head<2>() - b.position.head<2>()).norm();
}
}  // namespace

void RetargetConfig::validate() const {
  if (!(step_threshold > 0 && lift_threshold > 0 && stability_threshold > 0 && stability_iterations > 0 &&
        step_duration > 0)) {
    throw std::invalid_argument("retarget thresholds must be positive");
  }
  if (!(kp_stride > 0 && kp_stride <= 1 && kp_yaw > 0 && kp_yaw <= 1)) {
    throw std::invalid_argument("retarget gains must lie in (0, 1]");
  }
  limits.validate();
}

StepEvent detect_step_event(StepState& state, const TrackerSample& sample, const RetargetConfig& config) {
  if (!state.has_reference) {
    state.initial_pose = sample.pose;
    state.has_reference = true;
  }

  if (state.phase == StepPhase::Idle) {
    const double displacement = horizontal_distance(sample.pose, state.initial_pose);
    const double lift = sample.pose.position.z() - state.initial_pose.position.z();
    if (displacement >= config.step_threshold && lift >= config.lift_threshold) {
      state.phase = StepPhase::Stepping;
      state.start_time = sample.time;
      state.z_max = 0.0;
      state.avg_horizontal_velocity = 0.0;
      state.avg_yaw_rate = 0.0;
      state.sample_count = 0;
      state.quiet_iterations = 0;
      state.landed = false;
      return StepEvent::Started;
    }
    return StepEvent::None;
  }

  if (sample.linear_velocity.norm() < config.stability_threshold) {
    ++state.quiet_iterations;
  } else {
    state.quiet_iterations = 0;
  }
  if (state.quiet_iterations >= config.stability_iterations) {
    state.phase = StepPhase::Idle;
    state.quiet_iterations = 0;
    return StepEvent::Finished;
  }
  return StepEvent::None;
}

void accumulate_step_statistics(StepState& state, const TrackerSample& sample) {
  const double lift = sample.pose.position.z() - state.initial_pose.position.z();
  state.z_max = std::max(state.z_max, lift);
  const double n = static_cast<double>(++state.sample_count);
  const double horizontal_speed = sample.linear_velocity.head<2>().norm();
  state.avg_horizontal_velocity += (horizontal_speed - state.avg_horizontal_velocity) / n;
  state.avg_yaw_rate += (sample.yaw_rate - state.avg_yaw_rate) / n;
}

std::optional<Eigen::Vector2d> instantaneous_direction(const Pose3& current, const Pose3& initial) {
  const Eigen::Vector2d delta = current.position.head<2>() - initial.position.head<2>();
  const double norm = delta.norm();
  if (norm < kMinDirectionNorm) return std::nullopt;
  return Eigen::Vector2d(delta / norm);
}

double landing_factor(double z, double z_dot, double z_max) {
  if (z_dot >= 0.0 || z_max < kMinLiftForLanding) return 1.0;
  return std::max(0.0, std::min(1.0, z / z_max));
}

double remaining_step_time(const StepState& state, double now, const RetargetConfig& config) {
  return std::max(0.0, config.step_duration - (now - state.start_time));
}

StrideEstimate stride_estimate_update(const StepState& state, const TrackerSample& sample,
                                      const StrideEstimate& prev, const RetargetConfig& config) {
  StrideEstimate next = prev;
  const double max_stride = config.limits.max_stride;

  const double measured = horizontal_distance(sample.pose, state.initial_pose);
  const double remaining = remaining_step_time(state, sample.time, config);
  const double raw = measured + state.avg_horizontal_velocity * remaining;

  const double lift = sample.pose.position.z() - state.initial_pose.position.z();
  const double lambda = state.landed ? 0.0 : landing_factor(lift, sample.linear_velocity.z(), state.z_max);

  const double blended = std::clamp(lambda * raw + (1.0 - lambda) * measured, 0.0, max_stride);
  next.stride = std::clamp(prev.stride + config.kp_stride * (blended - prev.stride), 0.0, max_stride);
  next.landing_factor = lambda;

  if (auto direction = instantaneous_direction(sample.pose, state.initial_pose)) next.direction = direction;

  next.yaw = yaw_estimate_update(state, sample, prev.yaw, lambda, config);
  return next;
}

double yaw_estimate_update(const StepState& state, const TrackerSample& sample, double prev_yaw, double landing,
                           const RetargetConfig& config) {
  const double max_yaw = config.limits.max_yaw;
  const double measured = normalize_angle(sample.pose.yaw() - state.initial_pose.yaw());
  const double raw = measured + state.avg_yaw_rate * remaining_step_time(state, sample.time, config);
  const double blended = std::clamp(landing * raw + (1.0 - landing) * measured, -max_yaw, max_yaw);
  return std::clamp(prev_yaw + config.kp_yaw * (blended - prev_yaw), -max_yaw, max_yaw);
}

FootstepCommand compose_footstep(const StrideEstimate& estimate, const Pose3& user_swing_initial,
                                 const Pose3& user_stance, const Pose2& robot_stance, double robot_stance_height,
                                 FootSide side, const SafetyLimits& limits) {
  if (!estimate.direction) throw std::logic_error("footstep direction is undefined");

  const Pose2 initial = user_swing_initial.planar();
  const Eigen::Vector2d target = initial.position() + estimate.stride * *estimate.direction;
  const Pose2 user_target(target.x(), target.y(), initial.yaw + estimate.yaw);
  const Pose2 relative = clamp_footstep(transform_to_stance_frame(user_target, user_stance.planar()), side, limits);

  FootstepCommand command;
  command.side = side;
  command.pose = robot_stance.compose(relative);
  command.height = robot_stance_height;
  return command;
}

StepRetargeter::StepRetargeter(FootSide side, RetargetConfig config) : config_(config) {
  config_.validate();
  state_.side = side;
}

StepRetargeter::Update StepRetargeter::update(const TrackerSample& sample) {
  if (last_time_ && !(sample.time > *last_time_)) {
    throw std::invalid_argument("tracker samples must have strictly increasing time");
  }
  last_time_ = sample.time;

  Update out;
  out.event = detect_step_event(state_, sample, config_);
  if (out.event == StepEvent::Started) estimate_ = StrideEstimate{};

  if (state_.phase == StepPhase::Stepping || out.event == StepEvent::Finished) {
    accumulate_step_statistics(state_, sample);
    estimate_ = stride_estimate_update(state_, sample, estimate_, config_);
    if (estimate_.landing_factor == 0.0) state_.landed = true;
    out.stepping = true;
  }
  out.lift_off = state_.initial_pose;
  // The landed pose becomes the resting reference for the next step.
  if (out.event == StepEvent::Finished) state_.initial_pose = sample.pose;

  out.estimate = estimate_;
  {
    std::lock_guard lock(snapshot_mutex_);
    published_ = estimate_;
  }
  return out;
}

StrideEstimate StepRetargeter::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return published_;
}

}  // namespace stepstream
