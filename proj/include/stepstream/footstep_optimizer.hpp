#pragma once

#include "stepstream/geometry.hpp"
#include "stepstream/heightmap.hpp"
#include "stepstream/step_retarget.hpp"

#include <array>
#include <cstddef>
#include <stdexcept>

namespace stepstream {

struct FootGeometry {
  double length = 0.25;
  double width = 0.12;

  void validate() const;
};

struct SearchSpec {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double center_yaw = 0.0;
  double target_height = 0.0;
  double radius_factor = 1.5;
  double yaw_half_range = 0.7853981633974483;  // 45 deg
  double linear_step = 0.02;
  double yaw_step = 0.08726646259971647;  // 5 deg

  void validate() const;
};

/// Search spec centered on a command. The target height is the map height at the
/// command position when known, otherwise the command's own height.
SearchSpec make_search_spec(const FootstepCommand& command, const HeightMap& map);

struct CostWeights {
  double position = 10.0;
  double yaw = 30.0;
  double planarity = 100.0;
  double height = 1.0;
  double discontinuity = 50.0;
  double continuity_threshold = 0.03;
  double variance_limit = 0.05;
  double slope_limit = 0.8726646259971648;  // 50 deg
  double variance_penalty = 1.0;
  double slope_penalty = 1.0;

  void validate() const;
};

/// Unweighted cost terms of one candidate.
struct CostBreakdown {
  double position = 0.0;
  double yaw = 0.0;
  double planarity = 0.0;
  double height = 0.0;
};

struct CandidateResult {
  Pose2 pose;
  double height = 0.0;
  double total_cost = 0.0;
  CostBreakdown breakdown;
  bool feasible = false;
};

struct PlaneFit {
  double alpha = 0.0;  ///< dz/dx
  double beta = 0.0;   ///< dz/dy
  double gamma = 0.0;  ///< offset
  double mean_deviation = 0.0;
  double max_deviation = 0.0;
  double slope = 0.0;  ///< radians
};

struct ContinuityResult {
  bool continuous = true;
  double penalty = 0.0;
};

struct PlanarityReport {
  std::array<double, 5> heights{};
  bool continuous = true;
  PlaneFit plane;
  double cost = 0.0;
};

/// Stencil order: front-left, back-left, back-right, front-right, center.
using FootStencil = std::array<Eigen::Vector2d, 5>;

FootStencil sample_points(const Pose2& pose, const FootGeometry& foot);

/// Center-vs-corner continuity test. Unknown (NaN) heights are discontinuous
/// with an infinite penalty.
ContinuityResult continuity_check(const std::array<double, 5>& heights, const CostWeights& weights);

/// Least-squares plane z = alpha x + beta y + gamma through the samples.
/// Throws std::invalid_argument when the XY positions are collinear.
PlaneFit fit_plane(const std::array<Eigen::Vector3d, 5>& points);

/// Planarity cost for samples with known heights (no map lookup).
PlanarityReport evaluate_planarity(const FootStencil& stencil, const std::array<double, 5>& heights,
                                   const CostWeights& weights);

PlanarityReport planarity_cost(const Pose2& pose, const FootGeometry& foot, const HeightMap& map,
                               const CostWeights& weights);

CandidateResult total_cost(const Pose2& pose, const SearchSpec& spec, const HeightMap& map, const FootGeometry& foot,
                           const CostWeights& weights);

/// Candidate grid built outward from the search center: offsets k * step for
/// |k| <= floor(range / step) on each axis.
class SearchGrid {
 public:
  SearchGrid(const SearchSpec& spec, const FootGeometry& foot);

  std::size_t size() const { return linear_count_ * linear_count_ * yaw_count_; }
  std::size_t linear_count() const { return linear_count_; }
  std::size_t yaw_count() const { return yaw_count_; }

  /// Enumeration order: x fastest, then y, then yaw.
  Pose2 pose(std::size_t index) const;
  /// Tie-break keys: L1 grid offset and absolute yaw offset.
  double position_offset(std::size_t index) const;
  double yaw_offset(std::size_t index) const;

 private:
  SearchSpec spec_;
  long linear_half_ = 0;
  long yaw_half_ = 0;
  std::size_t linear_count_ = 0;
  std::size_t yaw_count_ = 0;
};

class NoSteppableRegion : public std::runtime_error {
 public:
  NoSteppableRegion() : std::runtime_error("no steppable candidate in the search region") {}
};

struct OptimizeOptions {
  /// 0 uses the hardware concurrency.
  unsigned threads = 0;
};

/// Exhaustive parallel search. The winner is the minimum of
/// (total_cost, L1 offset, |yaw offset|, enumeration index), so the result does
/// not depend on how the grid is partitioned. Throws NoSteppableRegion when
/// every candidate is infeasible.
CandidateResult optimize(const SearchSpec& spec, const HeightMap& map, const FootGeometry& foot,
                         const CostWeights& weights, const OptimizeOptions& options = {});

}  // namespace stepstream
