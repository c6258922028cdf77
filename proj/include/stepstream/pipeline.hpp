#pragma once

#include "stepstream/config.hpp"
#include "stepstream/formats.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stepstream {

/// Exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitInvalidInput = 2 };

/// Robot foot placement tracked by the streamer.
struct RobotFoot {
  Pose2 pose;
  double height = 0.0;
};

/// Two per-foot retargeters plus the robot stance bookkeeping needed to turn
/// user tracker samples into robot footstep commands.
class FootstepStreamer {
 public:
  struct Output {
    FootSide side = FootSide::Left;
    StepRetargeter::Update update;
    std::optional<FootstepCommand> command;
  };

  /// Robot feet start side by side at the minimum lateral separation.
  explicit FootstepStreamer(const RetargetConfig& config);
  FootstepStreamer(const RetargetConfig& config, RobotFoot left, RobotFoot right);

  Output process(FootSide side, const TrackerSample& sample);

  const RobotFoot& robot_foot(FootSide side) const { return robot_[index(side)]; }
  void set_robot_foot(FootSide side, const RobotFoot& foot) { robot_[index(side)] = foot; }
  const StepRetargeter& retargeter(FootSide side) const { return retargeters_[index(side)]; }

 private:
  static std::size_t index(FootSide side) { return side == FootSide::Left ? 0 : 1; }

  RetargetConfig config_;
  std::array<StepRetargeter, 2> retargeters_;
  std::array<RobotFoot, 2> robot_;
  std::array<std::optional<Pose3>, 2> user_pose_;
  std::array<std::uint64_t, 2> step_index_{};
  std::uint64_t next_step_index_ = 1;
};

/// Machine-readable error record written to the error stream.
void report_error(std::ostream& err, const std::string& kind, const std::string& message, std::size_t line = 0);

int run_retarget(std::istream& in, std::ostream& out, std::ostream& err, const PipelineConfig& config);

struct HeightmapJob {
  std::filesystem::path depth_dir;
  std::optional<std::filesystem::path> intrinsics;
  std::optional<std::filesystem::path> poses;
  std::filesystem::path output;
};

/// Frames are the `*.bin` files of the directory, fused in lexicographic order.
int run_heightmap(const HeightmapJob& job, std::ostream& err, const PipelineConfig& config);

struct AdjustJob {
  std::filesystem::path map;
  std::filesystem::path footsteps;
  std::filesystem::path output;
  bool bench = false;
};

int run_adjust(const AdjustJob& job, std::ostream& report, std::ostream& err, const PipelineConfig& config);

struct SimulateJob {
  std::filesystem::path scenario;
  std::filesystem::path output;
};

int run_simulate(const SimulateJob& job, std::ostream& report, std::ostream& err, const PipelineConfig& config);

struct SwingJob {
  Eigen::Vector3d from = Eigen::Vector3d::Zero();
  Eigen::Vector3d to = Eigen::Vector3d::Zero();
  double from_yaw = 0.0;
  double to_yaw = 0.0;
  std::filesystem::path output;
};

int run_swing(const SwingJob& job, std::ostream& err, const PipelineConfig& config);

/// Scenario document consumed by run_simulate.
struct Scenario {
  struct Event {
    enum class Kind { Tracker, Stability } kind = Kind::Tracker;
    double time = 0.0;
    TrackerRecord tracker;
    double score = 0.0;
  };
  std::optional<std::uint64_t> seed;
  std::optional<nlohmann::json> config;
  std::optional<std::filesystem::path> map;
  std::optional<RobotFoot> robot_left;
  std::optional<RobotFoot> robot_right;
  std::vector<Event> events;
};

/// Throws FormatError on schema violations. Relative map paths resolve against `base_dir`.
Scenario scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

struct SimulationResult {
  SyncLog log;
  std::size_t rejected_commands = 0;
  std::size_t unadjusted_commands = 0;
};

/// Retarget -> (optional) terrain adjustment -> walk simulation over the events.
SimulationResult simulate(const Scenario& scenario, const PipelineConfig& config, const HeightMap* map);

/// Per-step CSV (header + one row per executed step).
void write_sync_csv(std::ostream& out, const SyncLog& log);
nlohmann::json to_json(const SyncStatistics& stats);

}  // namespace stepstream
