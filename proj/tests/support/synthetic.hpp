#pragma once

// Synthetic scenes, streams and maps shared by the unit, integration and
// acceptance tests. Everything here is built from closed-form geometry so the
// expected values do not depend on the library code under test.

#include "stepstream/formats.hpp"
#include "stepstream/heightmap.hpp"
#include "stepstream/step_retarget.hpp"

#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace stepstream::testing {

using Terrain = std::function<double(double x, double y)>;

/// Camera `height` meters above (x, y) looking straight down, image-up along `yaw`.
Pose3 downward_camera(double x, double y, double height, double yaw);

CameraIntrinsics small_intrinsics();

/// Ray-cast depth image (optical-axis depth) of a height field.
DepthFrame render_depth(const CameraIntrinsics& intr, const Pose3& camera, const Terrain& terrain,
                        double timestamp = 0.0);

HeightMap make_map(int width, int height, double resolution, Eigen::Vector2d origin, const Terrain& terrain);

enum class TerrainKind { Flat, Ramp, TwoLevel, Noisy };

/// 120 x 120 map at 2 cm centered on the origin with randomized parameters.
HeightMap random_terrain(TerrainKind kind, std::mt19937_64& rng);

/// One synthetic user step of a single foot.
struct SyntheticStep {
  FootSide side = FootSide::Left;
  Eigen::Vector2d start;
  Eigen::Vector2d landing;
  double start_yaw = 0.0;
  double landing_yaw = 0.0;
  double lift_off_time = 0.0;
  double touchdown_time = 0.0;
};

struct WalkStream {
  std::vector<TrackerRecord> records;  ///< time ordered, both feet
  std::vector<SyntheticStep> steps;
};

struct WalkSpec {
  int steps = 6;
  double stride = 0.3;            ///< per-foot displacement of every step after the first
  double stance_width = 0.2;
  double swing_time = 0.5;
  double rest_time = 0.5;         ///< both feet still between steps
  double lift_height = 0.08;
  double rate = 100.0;
  double turn_per_step = 0.0;     ///< yaw change of the stepping foot
  bool include_velocity = true;
  double start_time = 0.2;
};

/// Alternating straight walk starting with the left foot. The first step of each
/// foot moves it stride/2 ahead of the other; later steps move it `stride`.
/// Horizontal motion follows a minimum-jerk profile (zero speed at both ends),
/// lift follows h sin(pi tau). The touchdown sample sits at z = 0 with the
/// descent velocity, later samples are at rest.
WalkStream straight_walk(const WalkSpec& spec);

/// Scenario document replaying a walk stream as tracker events.
nlohmann::json walk_scenario(const WalkStream& walk, std::optional<std::uint64_t> seed);

}  // namespace stepstream::testing
