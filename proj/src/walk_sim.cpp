#include "stepstream/walk_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stepstream {

std::string_view to_string(WalkPhase phase) {
  switch (phase) {
    case WalkPhase::Standing: return "standing";
    case WalkPhase::Transfer: return "transfer";
    case WalkPhase::Swing: return "swing";
  }
  return "unknown";
}

bool is_legal_transition(WalkPhase from, WalkPhase to) {
  switch (from) {
    case WalkPhase::Standing: return to == WalkPhase::Transfer;
    case WalkPhase::Transfer: return to == WalkPhase::Swing;
    case WalkPhase::Swing: return to == WalkPhase::Standing || to == WalkPhase::Transfer;
  }
  return false;
}

std::string_view to_string(EnqueueStatus status) {
  switch (status) {
    case EnqueueStatus::Started: return "started";
    case EnqueueStatus::Replaced: return "replaced";
    case EnqueueStatus::Queued: return "queued";
    case EnqueueStatus::Rejected: return "rejected";
    case EnqueueStatus::Stale: return "stale";
  }
  return "unknown";
}

void TimingConfig::validate() const {
  if (!(transfer_min > 0 && transfer_min <= transfer_max)) {
    throw std::invalid_argument("transfer bounds must satisfy 0 < transfer_min <= transfer_max");
  }
  if (!(swing_duration > 0)) throw std::invalid_argument("swing duration must be positive");
}

TransferSampler::TransferSampler(const TimingConfig& timing, std::uint64_t seed)
    : min_(timing.transfer_min), max_(timing.transfer_max), rng_(seed) {}

double TransferSampler::duration_for(double score) const {
  if (!(score >= 0.0 && score <= 1.0)) throw std::invalid_argument("stability score must lie in [0, 1]");
  return std::min(max_, min_ + score * (max_ - min_));
}

double TransferSampler::sample(std::optional<double> score) {
  if (score) return duration_for(*score);
  // 53 random mantissa bits; avoids the implementation-defined distributions.
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return duration_for(u);
}

WalkSimulator::WalkSimulator(TimingConfig timing, std::uint64_t seed) : timing_(timing), sampler_(timing, seed) {
  timing_.validate();
}

void WalkSimulator::set_stability_score(double score) {
  sampler_.duration_for(score);  // validates
  stability_score_ = score;
}

std::optional<FootstepCommand> WalkSimulator::active_target() const {
  if (!active_) return std::nullopt;
  return active_->target;
}

std::optional<FootstepCommand> WalkSimulator::last_executed(FootSide side) const {
  return side == FootSide::Left ? last_left_ : last_right_;
}

void WalkSimulator::begin_transfer(const FootstepCommand& command, double command_sent, double start) {
  ActiveStep step;
  step.target = command;
  step.record.step_index = command.step_index;
  step.record.user_step_start = command.user_step_start;
  step.record.command_sent = command_sent;
  step.record.robot_transfer_start = start;
  step.record.transfer_duration = sampler_.sample(stability_score_);
  step.record.robot_swing_start = start + step.record.transfer_duration;
  stability_score_.reset();
  active_ = step;
  phase_ = WalkPhase::Transfer;
}

EnqueueStatus WalkSimulator::enqueue_footstep(const FootstepCommand& command, double now) {
  if (last_executed_index_ && command.step_index <= *last_executed_index_) return EnqueueStatus::Stale;

  if (phase_ == WalkPhase::Standing) {
    begin_transfer(command, now, now);
    return EnqueueStatus::Started;
  }
  if (active_ && command.step_index == active_->record.step_index) {
    active_->target = command;
    return EnqueueStatus::Replaced;
  }
  if (phase_ == WalkPhase::Swing && command.side != active_->target.side) return EnqueueStatus::Rejected;

  if (!pending_ || pending_->step_index != command.step_index) pending_sent_ = now;
  pending_ = command;
  return EnqueueStatus::Queued;
}

std::vector<PhaseTransition> WalkSimulator::tick(double now) {
  if (now < now_) throw std::invalid_argument("simulation time must not decrease");
  now_ = now;

  std::vector<PhaseTransition> transitions;
  for (;;) {
    if (phase_ == WalkPhase::Transfer && now >= active_->record.robot_swing_start) {
      phase_ = WalkPhase::Swing;
      transitions.push_back({active_->record.robot_swing_start, WalkPhase::Transfer, WalkPhase::Swing});
      continue;
    }
    if (phase_ == WalkPhase::Swing) {
      const double touchdown = active_->record.robot_swing_start + timing_.swing_duration;
      if (now < touchdown) break;

      SyncRecord record = active_->record;
      record.robot_touchdown = touchdown;
      record.executed = active_->target;
      (record.executed.side == FootSide::Left ? last_left_ : last_right_) = record.executed;
      last_executed_index_ = record.step_index;
      log_.push_back(record);
      active_.reset();

      if (pending_ && pending_->step_index > record.step_index) {
        const FootstepCommand next = *pending_;
        pending_.reset();
        begin_transfer(next, pending_sent_, touchdown);
        transitions.push_back({touchdown, WalkPhase::Swing, WalkPhase::Transfer});
      } else {
        pending_.reset();
        phase_ = WalkPhase::Standing;
        transitions.push_back({touchdown, WalkPhase::Swing, WalkPhase::Standing});
      }
      continue;
    }
    break;
  }
  return transitions;
}

SyncStatistics measure_sync(const SyncLog& log) {
  if (log.empty()) throw std::invalid_argument("cannot measure synchronization of an empty log");
  SyncStatistics stats;
  double sum_start = 0.0, sum_touchdown = 0.0;
  for (const auto& r : log) {
    LatencySample s{r.step_index, r.robot_swing_start - r.user_step_start, r.robot_touchdown - r.user_step_start};
    sum_start += s.swing_start_latency;
    sum_touchdown += s.touchdown_latency;
    stats.max_swing_start_latency = std::max(stats.max_swing_start_latency, s.swing_start_latency);
    stats.max_touchdown_latency = std::max(stats.max_touchdown_latency, s.touchdown_latency);
    stats.steps.push_back(s);
  }
  const double n = static_cast<double>(log.size());
  stats.mean_swing_start_latency = sum_start / n;
  stats.mean_touchdown_latency = sum_touchdown / n;
  return stats;
}

}  // namespace stepstream
