#pragma once

#include "stepstream/footstep_optimizer.hpp"
#include "stepstream/heightmap.hpp"
#include "stepstream/step_retarget.hpp"
#include "stepstream/swing_trajectory.hpp"
#include "stepstream/walk_sim.hpp"

#include "json.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stepstream {

/// World grid the height map pipeline fuses into.
struct GlobalGridSpec {
  int width = 200;
  int height = 200;
  double resolution = 0.02;
  Eigen::Vector2d origin{-2.0, -2.0};
};

/// Search ranges/steps of the optimizer (the center comes from each command).
struct SearchSettings {
  double radius_factor = 1.5;
  double yaw_half_range = 0.7853981633974483;
  double linear_step = 0.02;
  double yaw_step = 0.08726646259971647;

  SearchSpec apply(SearchSpec spec) const;
};

struct SwingSettings {
  double swing_height = 0.1;
  double alpha_wp1 = 0.15;
  double alpha_wp2 = 0.85;
  double duration = 0.65;
  double height_threshold = 0.01;
  double sample_rate = 500.0;
};

struct PipelineConfig {
  RetargetConfig retarget;
  FusionConfig fusion;
  LocalGridSpec local_grid;
  GlobalGridSpec global_grid;
  CostWeights weights;
  FootGeometry foot;
  SearchSettings search;
  SwingSettings swing;
  TimingConfig timing;
  std::uint64_t seed = 0;
  /// Optimizer worker threads (0 = hardware concurrency).
  unsigned threads = 0;

  void validate() const;
};

/// Raised for malformed or schema-violating configuration documents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every field materialized, suitable for `--dump-config`.
nlohmann::json to_json(const PipelineConfig& config);

/// Overlays `doc` onto the defaults. Unknown keys and wrong types raise ConfigError.
PipelineConfig config_from_json(const nlohmann::json& doc);
PipelineConfig load_config(const std::string& path);

}  // namespace stepstream
