#include "stepstream/heightmap.hpp"

#include "stepstream/parallel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stepstream {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0 && fy > 0)) throw std::invalid_argument("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("image dimensions must be positive");
  if (!(cx >= 0 && cx <= width && cy >= 0 && cy <= height)) {
    throw std::invalid_argument("principal point must lie inside the image");
  }
}

void FusionConfig::validate() const {
  if (!(alpha >= 0 && alpha <= 1 && ema_alpha >= 0 && ema_alpha <= 1)) {
    throw std::invalid_argument("fusion weights must lie in [0, 1]");
  }
  if (neighborhood_radius < 1) throw std::invalid_argument("neighborhood radius must be >= 1");
  if (!(outlier_distance > 0)) throw std::invalid_argument("outlier distance must be positive");
}

HeightMap::HeightMap(int width, int height, double resolution, Eigen::Vector2d origin, MapFrame frame)
    : width_(width), height_(height), resolution_(resolution), origin_(origin), frame_(frame) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("height map dimensions must be positive");
  if (!(resolution > 0)) throw std::invalid_argument("height map resolution must be positive");
  heights_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), kNaN);
}

std::optional<HeightMap::Cell> HeightMap::cell_at(const Eigen::Vector2d& point) const {
  const double fc = std::round((point.x() - origin_.x()) / resolution_);
  const double fr = std::round((point.y() - origin_.y()) / resolution_);
  if (!(fc >= 0 && fr >= 0 && fc < width_ && fr < height_)) return std::nullopt;
  return Cell{static_cast<int>(fc), static_cast<int>(fr)};
}

double HeightMap::lookup(const Eigen::Vector2d& point) const {
  const auto cell = cell_at(point);
  return cell ? at(cell->col, cell->row) : kNaN;
}

void HeightMap::fill(double value) { std::fill(heights_.begin(), heights_.end(), value); }

Eigen::Vector2d project(const Eigen::Vector3d& point, const CameraIntrinsics& intr) {
  if (!(point.z() > 0.0)) throw std::domain_error("cannot project a point at or behind the camera");
  return {intr.fx * point.x() / point.z() + intr.cx, intr.fy * point.y() / point.z() + intr.cy};
}

std::optional<Eigen::Vector3d> unproject(double u, double v, double depth, const CameraIntrinsics& intr) {
  if (!(depth > 0.0) || !std::isfinite(depth)) return std::nullopt;
  return Eigen::Vector3d((u - intr.cx) * depth / intr.fx, (v - intr.cy) * depth / intr.fy, depth);
}

Pose2 local_frame_of(const Pose3& camera_pose) {
  Eigen::Vector2d heading = camera_pose.rotation.col(2).head<2>();
  if (heading.norm() < 1e-6) heading = -camera_pose.rotation.col(1).head<2>();
  return {camera_pose.position.x(), camera_pose.position.y(), std::atan2(heading.y(), heading.x())};
}

namespace {

// Mean world height of the valid pixels in the window around the projection of
// `world_point`; NaN when nothing valid is seen.
double gather_window(const DepthFrame& frame, const CameraIntrinsics& intr, const Eigen::Matrix3d& world_to_cam,
                     const Eigen::Vector3d& world_point, int radius) {
  const Eigen::Vector3d cam = world_to_cam * (world_point - frame.camera_pose.position);
  if (!(cam.z() > 0.0)) return kNaN;
  const Eigen::Vector2d pixel = project(cam, intr);
  const double cu = std::round(pixel.x()), cv = std::round(pixel.y());
  if (!(cu >= 0 && cv >= 0 && cu < intr.width && cv < intr.height)) return kNaN;

  const int u0 = static_cast<int>(cu), v0 = static_cast<int>(cv);
  double sum = 0.0;
  int count = 0;
  for (int v = std::max(0, v0 - radius); v <= std::min(intr.height - 1, v0 + radius); ++v) {
    for (int u = std::max(0, u0 - radius); u <= std::min(intr.width - 1, u0 + radius); ++u) {
      const double d = frame.depth[static_cast<std::size_t>(v) * static_cast<std::size_t>(intr.width) +
                                   static_cast<std::size_t>(u)];
      if (auto p = unproject(u, v, d, intr)) {
        sum += frame.camera_pose.transform_point(*p).z();
        ++count;
      }
    }
  }
  return count > 0 ? sum / count : kNaN;
}

}  // namespace

HeightMap extract_local(const DepthFrame& frame, const CameraIntrinsics& intr, const LocalGridSpec& grid) {
  intr.validate();
  if (frame.depth.size() != static_cast<std::size_t>(intr.width) * static_cast<std::size_t>(intr.height)) {
    throw std::invalid_argument("depth frame size does not match the intrinsics");
  }
  if (grid.pixel_radius < 0 || grid.projection_passes < 1) throw std::invalid_argument("invalid local grid spec");

  HeightMap local(grid.width, grid.height, grid.resolution, grid.origin, MapFrame::LocalYawAligned);
  const Pose2 frame_pose = local_frame_of(frame.camera_pose);
  const Eigen::Matrix3d world_to_cam = frame.camera_pose.rotation.transpose();

  // Each cell reads only the depth image, so the chunking does not affect the result.
  parallel_chunks(local.size(), 0, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const int col = static_cast<int>(i % static_cast<std::size_t>(grid.width));
      const int row = static_cast<int>(i / static_cast<std::size_t>(grid.width));
      const Eigen::Vector2d xy = frame_pose.transform_point(local.cell_center(col, row));
      double z = grid.reference_height;
      double h = kNaN;
      for (int pass = 0; pass < grid.projection_passes; ++pass) {
        const double estimate = gather_window(frame, intr, world_to_cam, {xy.x(), xy.y(), z}, grid.pixel_radius);
        if (std::isnan(estimate)) break;
        h = estimate;
        z = estimate;
      }
      local.heights()[i] = h;
    }
  });
  return local;
}

void fuse_global(HeightMap& global, const HeightMap& local, const Pose2& local_to_world, const FusionConfig& config) {
  if (global.frame() != MapFrame::World || local.frame() != MapFrame::LocalYawAligned) {
    throw std::invalid_argument("fuse_global expects a world map and a local map");
  }
  for (int row = 0; row < global.height(); ++row) {
    for (int col = 0; col < global.width(); ++col) {
      const Eigen::Vector2d world = global.cell_center(col, row);
      bool excluded = false;
      for (const auto& region : config.exclusion_mask) excluded = excluded || region.contains(world);
      if (excluded) continue;

      const double measurement = local.lookup(local_to_world.inverse_transform_point(world));
      if (!std::isfinite(measurement)) continue;
      double& h = global.at(col, row);
      h = std::isnan(h) ? measurement : config.alpha * h + (1.0 - config.alpha) * measurement;
    }
  }
}

HeightMap remove_outliers(const HeightMap& map, const FusionConfig& config) {
  HeightMap out = map;
  const int r = config.neighborhood_radius;
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      const double h = map.at(col, row);
      if (std::isnan(h)) continue;
      double sum = 0.0;
      int count = 0;
      for (int dr = -r; dr <= r; ++dr) {
        for (int dc = -r; dc <= r; ++dc) {
          if ((dr == 0 && dc == 0) || !map.contains(col + dc, row + dr)) continue;
          const double n = map.at(col + dc, row + dr);
          if (std::isnan(n)) continue;
          sum += n;
          ++count;
        }
      }
      if (count == 0) continue;
      const double mean = sum / count;
      if (std::abs(h - mean) > config.outlier_distance) out.at(col, row) = mean;
    }
  }
  return out;
}

HeightMap postfilter(const HeightMap& global, const HeightMap* previous_filtered, const FusionConfig& config) {
  HeightMap smoothed = global;
  if (previous_filtered) {
    if (previous_filtered->size() != global.size()) throw std::invalid_argument("filtered map size mismatch");
    auto& out = smoothed.heights();
    const auto& prev = previous_filtered->heights();
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (std::isnan(prev[i])) continue;
      out[i] = std::isnan(out[i]) ? prev[i] : config.ema_alpha * prev[i] + (1.0 - config.ema_alpha) * out[i];
    }
  }
  return remove_outliers(smoothed, config);
}

HeightMapFuser::HeightMapFuser(HeightMap global, FusionConfig config)
    : global_(std::move(global)), config_(std::move(config)) {
  config_.validate();
}

void HeightMapFuser::integrate(const HeightMap& local, const Pose2& local_to_world) {
  fuse_global(global_, local, local_to_world, config_);
  filtered_ = postfilter(global_, filtered_ ? &*filtered_ : nullptr, config_);
}

}  // namespace stepstream
