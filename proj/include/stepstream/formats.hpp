#pragma once

#include "stepstream/footstep_optimizer.hpp"
#include "stepstream/heightmap.hpp"
#include "stepstream/step_retarget.hpp"
#include "stepstream/walk_sim.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace stepstream {

/// Malformed input. `line` is 1-based when the input is line oriented, 0 otherwise.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t line = 0) : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// HM1 text maps:
//   HM1 <width> <height> <resolution> <origin_x> <origin_y>
//   <height> rows of <width> space-separated values, row 0 first; `nan` = unknown.
void write_hm1(std::ostream& out, const HeightMap& map);
HeightMap read_hm1(std::istream& in);
void save_hm1(const std::filesystem::path& path, const HeightMap& map);
HeightMap load_hm1(const std::filesystem::path& path);

// Depth frames: `<stem>.bin` holds width*height little-endian float32 values,
// row-major; `<stem>.json` holds
//   {"timestamp": s, "camera_pose": {"position": [x,y,z], "orientation": [w,x,y,z]},
//    "intrinsics": {"fx","fy","cx","cy","width","height"}}   (intrinsics optional)
struct DepthFrameFile {
  DepthFrame frame;
  std::optional<CameraIntrinsics> intrinsics;
  std::string stem;
};

CameraIntrinsics intrinsics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CameraIntrinsics& intr);
Pose3 pose3_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Pose3& pose);

std::vector<float> read_depth_binary(const std::filesystem::path& path);
void write_depth_binary(const std::filesystem::path& path, const std::vector<float>& depth);
/// Reads `<dir>/<stem>.bin` and its sidecar. Throws FormatError when either is
/// missing or malformed.
DepthFrameFile load_depth_frame(const std::filesystem::path& dir, const std::string& stem);
void save_depth_frame(const std::filesystem::path& dir, const std::string& stem, const DepthFrame& frame,
                      const std::optional<CameraIntrinsics>& intrinsics);

/// One tracker record:
///   {"t": s, "side": "left"|"right", "position": [x,y,z],
///    optional "orientation": [w,x,y,z] or "yaw": rad,
///    optional "velocity": [vx,vy,vz], optional "yaw_rate": rad/s}
struct TrackerRecord {
  FootSide side = FootSide::Left;
  TrackerSample sample;
  bool has_velocity = false;
  bool has_yaw_rate = false;
};

TrackerRecord tracker_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrackerRecord& record);

/// Validates ordering (non-decreasing overall, strictly increasing per foot) and
/// fills missing velocities by backward differences of consecutive poses of the
/// same foot (zero for a foot's first sample).
class TrackerStreamNormalizer {
 public:
  /// Throws FormatError on a time regression.
  TrackerSample normalize(const TrackerRecord& record, std::size_t line = 0);

 private:
  std::optional<double> last_time_;
  std::map<FootSide, TrackerSample> previous_;
};

nlohmann::json to_json(const FootstepCommand& command);
FootstepCommand footstep_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CandidateResult& result);
nlohmann::json to_json(const StrideEstimate& estimate);

}  // namespace stepstream
