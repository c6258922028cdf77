#pragma once

#include "stepstream/geometry.hpp"

#include <cstdint>
#include <mutex>
#include <optional>

namespace stepstream {

/// One pose reading of a user foot tracker with its velocities.
struct TrackerSample {
  double time = 0.0;
  Pose3 pose;
  Eigen::Vector3d linear_velocity = Eigen::Vector3d::Zero();
  double yaw_rate = 0.0;
};

/// A footstep for the robot controller: which foot, where (world frame), and the
/// terrain height it should land at.
struct FootstepCommand {
  FootSide side = FootSide::Left;
  Pose2 pose;
  double height = 0.0;
  /// Monotone identifier of the user step that produced this command.
  std::uint64_t step_index = 0;
  /// Time at which the user step was detected.
  double user_step_start = 0.0;
};

enum class StepPhase { Idle, Stepping };
enum class StepEvent { None, Started, Finished };

struct StepState {
  StepPhase phase = StepPhase::Idle;
  FootSide side = FootSide::Left;
  /// Reference pose: the resting pose while Idle, the pose at lift-off while Stepping.
  Pose3 initial_pose;
  bool has_reference = false;
  double start_time = 0.0;
  double z_max = 0.0;
  double avg_horizontal_velocity = 0.0;
  double avg_yaw_rate = 0.0;
  std::uint32_t sample_count = 0;
  std::uint32_t quiet_iterations = 0;
  /// Set once the landing factor has reached zero within the current step.
  bool landed = false;
};

struct StrideEstimate {
  double stride = 0.0;
  double yaw = 0.0;
  std::optional<Eigen::Vector2d> direction;
  double landing_factor = 1.0;
};

struct RetargetConfig {
  double step_threshold = 0.04;
  double lift_threshold = 0.01;
  double stability_threshold = 0.05;
  std::uint32_t stability_iterations = 10;
  double step_duration = 0.8;
  double kp_stride = 0.3;
  double kp_yaw = 0.3;
  SafetyLimits limits;

  void validate() const;
};

/// Advances the step detector by one sample.
///
/// Idle -> Started when the horizontal displacement from the resting pose
/// reaches step_threshold and the lift reaches lift_threshold (both required).
/// Stepping -> Finished once the tracker speed has stayed below
/// stability_threshold for stability_iterations consecutive samples. A start
/// resets the per-step statistics; the lift-off reference is the resting pose.
StepEvent detect_step_event(StepState& state, const TrackerSample& sample, const RetargetConfig& config);

/// Folds a sample into the running per-step statistics (z_max, mean horizontal
/// speed, mean yaw rate).
void accumulate_step_statistics(StepState& state, const TrackerSample& sample);

/// Unit XY direction from `initial` to `current`; nullopt when they coincide
/// within 1e-6 m.
std::optional<Eigen::Vector2d> instantaneous_direction(const Pose3& current, const Pose3& initial);

/// 1 while the foot is not descending, otherwise clamp(z / z_max, 0, 1).
double landing_factor(double z, double z_dot, double z_max);

/// Remaining time in the robot step: max(0, step_duration - elapsed).
double remaining_step_time(const StepState& state, double now, const RetargetConfig& config);

/// One update of the stride length estimate. Also refreshes the direction
/// (holding the previous one when undefined) and the landing factor.
StrideEstimate stride_estimate_update(const StepState& state, const TrackerSample& sample,
                                      const StrideEstimate& prev, const RetargetConfig& config);

/// One update of the relative yaw estimate, returning the new yaw.
double yaw_estimate_update(const StepState& state, const TrackerSample& sample, double prev_yaw,
                           double landing, const RetargetConfig& config);

/// Maps the user stride/yaw estimate onto the robot stance foot.
///
/// The user swing foot is moved from its lift-off pose by stride * direction and
/// turned by the yaw estimate; that target, expressed in the user stance foot
/// frame, is clamped and applied to the robot stance foot. Throws
/// std::logic_error when no direction is known.
FootstepCommand compose_footstep(const StrideEstimate& estimate, const Pose3& user_swing_initial,
                                 const Pose3& user_stance, const Pose2& robot_stance, double robot_stance_height,
                                 FootSide side, const SafetyLimits& limits);

/// Per-foot estimator. Single writer; `snapshot()` may be called from another
/// thread.
class StepRetargeter {
 public:
  struct Update {
    StepEvent event = StepEvent::None;
    /// True when this sample belonged to a step (estimate refreshed).
    bool stepping = false;
    StrideEstimate estimate;
    /// Lift-off pose of the step this sample belonged to.
    Pose3 lift_off;
  };

  StepRetargeter(FootSide side, RetargetConfig config);

  /// Samples must arrive in strictly increasing time order.
  Update update(const TrackerSample& sample);

  FootSide side() const { return state_.side; }
  const StepState& state() const { return state_; }
  StrideEstimate snapshot() const;

 private:
  RetargetConfig config_;
  StepState state_;
  StrideEstimate estimate_;
  std::optional<double> last_time_;
  mutable std::mutex snapshot_mutex_;
  StrideEstimate published_;
};

}  // namespace stepstream
