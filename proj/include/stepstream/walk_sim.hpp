#pragma once

#include "stepstream/step_retarget.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace stepstream {

enum class WalkPhase { Standing, Transfer, Swing };

std::string_view to_string(WalkPhase phase);
bool is_legal_transition(WalkPhase from, WalkPhase to);

struct TimingConfig {
  double transfer_min = 0.15;
  double transfer_max = 1.0;
  double swing_duration = 0.65;

  void validate() const;
};

/// Maps a stability score in [0, 1] affinely onto [transfer_min, transfer_max].
/// Without a score, one is drawn from a seeded generator.
class TransferSampler {
 public:
  TransferSampler(const TimingConfig& timing, std::uint64_t seed);

  double duration_for(double score) const;
  double sample(std::optional<double> score);

 private:
  double min_;
  double max_;
  std::mt19937_64 rng_;
};

struct SyncRecord {
  std::uint64_t step_index = 0;
  double user_step_start = 0.0;
  double command_sent = 0.0;
  double robot_transfer_start = 0.0;
  double robot_swing_start = 0.0;
  double robot_touchdown = 0.0;
  double transfer_duration = 0.0;
  FootstepCommand executed;
};

using SyncLog = std::vector<SyncRecord>;

enum class EnqueueStatus {
  Started,   ///< robot was standing; transfer begins now
  Replaced,  ///< target of the active step updated
  Queued,    ///< stored as the single pending next step
  Rejected,  ///< would lift the support foot mid-swing
  Stale,     ///< step already executed
};

std::string_view to_string(EnqueueStatus status);

struct PhaseTransition {
  double time = 0.0;
  WalkPhase from = WalkPhase::Standing;
  WalkPhase to = WalkPhase::Standing;
};

/// Robot-side step timing: Standing -> Transfer -> Swing -> Standing/Transfer,
/// driven by an explicit caller clock.
class WalkSimulator {
 public:
  WalkSimulator(TimingConfig timing, std::uint64_t seed);

  /// Stability score used for the next sampled transfer (consumed once).
  void set_stability_score(double score);

  EnqueueStatus enqueue_footstep(const FootstepCommand& command, double now);

  /// Advances the clock; returns the transitions that happened up to `now`.
  /// Throws std::invalid_argument when time goes backwards.
  std::vector<PhaseTransition> tick(double now);

  WalkPhase phase() const { return phase_; }
  const SyncLog& log() const { return log_; }
  std::optional<FootstepCommand> active_target() const;
  std::optional<FootstepCommand> pending() const { return pending_; }
  /// Last touched-down footstep per side, if any.
  std::optional<FootstepCommand> last_executed(FootSide side) const;

 private:
  struct ActiveStep {
    SyncRecord record;
    FootstepCommand target;
  };

  void begin_transfer(const FootstepCommand& command, double command_sent, double start);

  TimingConfig timing_;
  TransferSampler sampler_;
  std::optional<double> stability_score_;
  WalkPhase phase_ = WalkPhase::Standing;
  double now_ = 0.0;
  std::optional<ActiveStep> active_;
  std::optional<FootstepCommand> pending_;
  double pending_sent_ = 0.0;
  std::optional<std::uint64_t> last_executed_index_;
  std::optional<FootstepCommand> last_left_;
  std::optional<FootstepCommand> last_right_;
  SyncLog log_;
};

struct LatencySample {
  std::uint64_t step_index = 0;
  double swing_start_latency = 0.0;
  double touchdown_latency = 0.0;
};

struct SyncStatistics {
  std::vector<LatencySample> steps;
  double mean_swing_start_latency = 0.0;
  double max_swing_start_latency = 0.0;
  double mean_touchdown_latency = 0.0;
  double max_touchdown_latency = 0.0;
};

/// Latencies measured from the user step start. Throws std::invalid_argument on
/// an empty log.
SyncStatistics measure_sync(const SyncLog& log);

}  // namespace stepstream
