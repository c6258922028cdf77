#pragma once

#include "stepstream/geometry.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace stepstream {

/// Pinhole intrinsics of a depth camera (optical frame: x right, y down, z forward).
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const;
};

/// Row-major depth image in meters (z along the optical axis, NaN = invalid).
struct DepthFrame {
  double timestamp = 0.0;
  std::vector<float> depth;
  /// Camera optical frame expressed in the world.
  Pose3 camera_pose;
};

enum class MapFrame { LocalYawAligned, World };

/// Uniform elevation grid. Cell (col, row) has its center at
/// origin + (col, row) * resolution; heights are stored row-major, NaN = unknown.
class HeightMap {
 public:
  struct Cell {
    int col = 0;
    int row = 0;
  };

  HeightMap() = default;
  HeightMap(int width, int height, double resolution, Eigen::Vector2d origin,
            MapFrame frame = MapFrame::World);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Eigen::Vector2d& origin() const { return origin_; }
  MapFrame frame() const { return frame_; }
  std::size_t size() const { return heights_.size(); }

  bool contains(int col, int row) const { return col >= 0 && row >= 0 && col < width_ && row < height_; }
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
  }

  double at(int col, int row) const { return heights_[index(col, row)]; }
  double& at(int col, int row) { return heights_[index(col, row)]; }

  Eigen::Vector2d cell_center(int col, int row) const {
    return origin_ + Eigen::Vector2d(col * resolution_, row * resolution_);
  }
  /// Nearest cell to a planar point, nullopt when outside the grid.
  std::optional<Cell> cell_at(const Eigen::Vector2d& point) const;
  /// Nearest-cell height lookup; NaN outside the grid or over unknown cells.
  double lookup(const Eigen::Vector2d& point) const;

  void fill(double value);
  const std::vector<double>& heights() const { return heights_; }
  std::vector<double>& heights() { return heights_; }

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.02;
  Eigen::Vector2d origin_ = Eigen::Vector2d::Zero();
  MapFrame frame_ = MapFrame::World;
  std::vector<double> heights_;
};

/// Geometry of a local extraction grid, expressed in the yaw-aligned sensor frame.
struct LocalGridSpec {
  int width = 100;
  int height = 100;
  double resolution = 0.02;
  /// Center of cell (0, 0) in the local frame.
  Eigen::Vector2d origin{0.0, -1.0};
  /// Half-width in pixels of the square neighborhood gathered per cell (1 -> 3x3).
  int pixel_radius = 1;
  /// World height at which cell centers are first projected into the image.
  double reference_height = 0.0;
  /// Number of projection passes; later passes re-project at the previous estimate.
  int projection_passes = 2;
};

/// Axis-aligned world-frame box excluded from fusion (e.g. the robot's own limbs).
struct ExclusionRegion {
  Eigen::Vector2d min;
  Eigen::Vector2d max;
  bool contains(const Eigen::Vector2d& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
  }
};

struct FusionConfig {
  double alpha = 0.7;
  double ema_alpha = 0.7;
  double outlier_distance = 0.1;
  int neighborhood_radius = 2;
  std::vector<ExclusionRegion> exclusion_mask;

  void validate() const;
};

/// Camera-frame point to pixel coordinates. Throws std::domain_error for z <= 0.
Eigen::Vector2d project(const Eigen::Vector3d& point, const CameraIntrinsics& intr);

/// Pixel + depth back to a camera-frame point; nullopt for NaN or non-positive depth.
std::optional<Eigen::Vector3d> unproject(double u, double v, double depth, const CameraIntrinsics& intr);

/// Yaw-aligned local frame attached to a camera: origin below the sensor, heading
/// of the optical axis (falls back to the camera x axis when looking straight down).
Pose2 local_frame_of(const Pose3& camera_pose);

/// Per-cell neighborhood average of unprojected depth points; cells without valid
/// points are NaN. Heights are world z. Throws std::invalid_argument when the
/// frame does not match the intrinsics.
HeightMap extract_local(const DepthFrame& frame, const CameraIntrinsics& intr, const LocalGridSpec& grid);

/// Complementary-filter fusion of a local map into the world map. Each world cell
/// looks up the nearest local cell; unknown priors adopt the measurement.
void fuse_global(HeightMap& global, const HeightMap& local, const Pose2& local_to_world,
                 const FusionConfig& config);

/// EMA against the previous filtered map (absent -> adopt), then replacement of
/// cells deviating from their valid-neighbor mean by more than outlier_distance.
HeightMap postfilter(const HeightMap& global, const HeightMap* previous_filtered, const FusionConfig& config);

/// Outlier pass alone (second stage of postfilter).
HeightMap remove_outliers(const HeightMap& map, const FusionConfig& config);

/// Persistent world map with its filtered view. Single writer.
class HeightMapFuser {
 public:
  HeightMapFuser(HeightMap global, FusionConfig config);

  void integrate(const HeightMap& local, const Pose2& local_to_world);

  const HeightMap& raw() const { return global_; }
  /// Filtered map after the last integrate (the raw map before any).
  const HeightMap& filtered() const { return filtered_ ? *filtered_ : global_; }

 private:
  HeightMap global_;
  std::optional<HeightMap> filtered_;
  FusionConfig config_;
};

}  // namespace stepstream
