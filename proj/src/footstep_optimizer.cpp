#include "stepstream/footstep_optimizer.hpp"

#include "stepstream/parallel.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace stepstream {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Grid extents are floor(range / step); the slack keeps exact multiples
// (e.g. 45 deg / 5 deg) from losing their last sample to rounding.
constexpr double kGridSlack = 1e-9;
}  // namespace

void FootGeometry::validate() const {
  if (!(length > 0 && width > 0)) throw std::invalid_argument("foot dimensions must be positive");
}

void SearchSpec::validate() const {
  if (!(linear_step > 0 && yaw_step > 0)) throw std::invalid_argument("search steps must be positive");
  if (!(radius_factor > 0 && yaw_half_range > 0)) throw std::invalid_argument("search ranges must be positive");
}

void CostWeights::validate() const {
  const double all[] = {position,       yaw,           planarity,        height,          discontinuity,
                        continuity_threshold, variance_limit, slope_limit, variance_penalty, slope_penalty};
  for (double w : all) {
    if (!(w >= 0)) throw std::invalid_argument("cost weights must be non-negative");
  }
}

SearchSpec make_search_spec(const FootstepCommand& command, const HeightMap& map) {
  SearchSpec spec;
  spec.center = command.pose.position();
  spec.center_yaw = command.pose.yaw;
  const double terrain = map.lookup(spec.center);
  spec.target_height = std::isfinite(terrain) ? terrain : command.height;
  return spec;
}

FootStencil sample_points(const Pose2& pose, const FootGeometry& foot) {
  const double hx = 0.5 * foot.length, hy = 0.5 * foot.width;
  const Pose2 frame(pose.x, pose.y, pose.yaw);
  return {frame.transform_point({hx, hy}), frame.transform_point({-hx, hy}), frame.transform_point({-hx, -hy}),
          frame.transform_point({hx, -hy}), pose.position()};
}

ContinuityResult continuity_check(const std::array<double, 5>& h, const CostWeights& weights) {
  for (double v : h) {
    if (!std::isfinite(v)) return {false, kInf};
  }
  const double front = 0.5 * (h[0] + h[3]);
  const double back = 0.5 * (h[1] + h[2]);
  const double mean = 0.5 * (front + back);
  if (!(std::abs(h[4] - mean) > weights.continuity_threshold)) return {true, 0.0};
  const double spread = std::abs(h[0] - h[4]) + std::abs(h[1] - h[4]) + std::abs(h[2] - h[4]) + std::abs(h[3] - h[4]);
  return {false, weights.discontinuity * spread};
}

PlaneFit fit_plane(const std::array<Eigen::Vector3d, 5>& points) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());

  // Normal equations in centered coordinates decouple the offset.
  double sxx = 0, sxy = 0, syy = 0, sxz = 0, syz = 0;
  for (const auto& p : points) {
    const Eigen::Vector3d d = p - mean;
    sxx += d.x() * d.x();
    sxy += d.x() * d.y();
    syy += d.y() * d.y();
    sxz += d.x() * d.z();
    syz += d.y() * d.z();
  }
  const double det = sxx * syy - sxy * sxy;
  if (!(det > 1e-12 * sxx * syy) || sxx <= 0 || syy <= 0) {
    throw std::invalid_argument("plane fit needs non-collinear sample positions");
  }

  PlaneFit fit;
  fit.alpha = (sxz * syy - syz * sxy) / det;
  fit.beta = (syz * sxx - sxz * sxy) / det;
  fit.gamma = mean.z() - fit.alpha * mean.x() - fit.beta * mean.y();

  double sum = 0.0;
  for (const auto& p : points) {
    const double residual = std::abs(p.z() - (fit.alpha * p.x() + fit.beta * p.y() + fit.gamma));
    sum += residual;
    fit.max_deviation = std::max(fit.max_deviation, residual);
  }
  fit.mean_deviation = sum / static_cast<double>(points.size());
  fit.slope = std::atan(std::sqrt(fit.alpha * fit.alpha + fit.beta * fit.beta));
  return fit;
}

PlanarityReport evaluate_planarity(const FootStencil& stencil, const std::array<double, 5>& heights,
                                   const CostWeights& weights) {
  PlanarityReport report;
  report.heights = heights;
  const ContinuityResult continuity = continuity_check(heights, weights);
  report.continuous = continuity.continuous;
  if (!continuity.continuous) {
    report.cost = continuity.penalty;
    return report;
  }

  std::array<Eigen::Vector3d, 5> points;
  for (std::size_t i = 0; i < points.size(); ++i) points[i] = {stencil[i].x(), stencil[i].y(), heights[i]};
  report.plane = fit_plane(points);
  report.cost = report.plane.mean_deviation;
  if (report.plane.slope > weights.slope_limit) report.cost += weights.slope_penalty;
  if (report.plane.max_deviation > weights.variance_limit) report.cost += weights.variance_penalty;
  return report;
}

PlanarityReport planarity_cost(const Pose2& pose, const FootGeometry& foot, const HeightMap& map,
                               const CostWeights& weights) {
  const FootStencil stencil = sample_points(pose, foot);
  std::array<double, 5> heights;
  for (std::size_t i = 0; i < heights.size(); ++i) heights[i] = map.lookup(stencil[i]);
  return evaluate_planarity(stencil, heights, weights);
}

CandidateResult total_cost(const Pose2& pose, const SearchSpec& spec, const HeightMap& map, const FootGeometry& foot,
                           const CostWeights& weights) {
  CandidateResult result;
  result.pose = pose;
  result.height = map.lookup(pose.position());

  CostBreakdown& terms = result.breakdown;
  terms.position = std::abs(pose.x - spec.center.x()) + std::abs(pose.y - spec.center.y());
  terms.yaw = std::abs(normalize_angle(pose.yaw - spec.center_yaw));
  terms.planarity = planarity_cost(pose, foot, map, weights).cost;
  terms.height = std::abs(result.height - spec.target_height);

  result.feasible = std::isfinite(terms.planarity) && std::isfinite(terms.height);
  result.total_cost = result.feasible ? weights.position * terms.position + weights.yaw * terms.yaw +
                                            weights.planarity * terms.planarity + weights.height * terms.height
                                      : kInf;
  return result;
}

SearchGrid::SearchGrid(const SearchSpec& spec, const FootGeometry& foot) : spec_(spec) {
  spec.validate();
  foot.validate();
  const double radius = spec.radius_factor * foot.length;
  linear_half_ = static_cast<long>(std::floor(radius / spec.linear_step + kGridSlack));
  yaw_half_ = static_cast<long>(std::floor(spec.yaw_half_range / spec.yaw_step + kGridSlack));
  linear_count_ = static_cast<std::size_t>(2 * linear_half_ + 1);
  yaw_count_ = static_cast<std::size_t>(2 * yaw_half_ + 1);
}

namespace {
struct GridIndex {
  long kx, ky, kyaw;
};

GridIndex decompose(std::size_t index, std::size_t linear_count, long linear_half, long yaw_half) {
  const std::size_t ix = index % linear_count;
  const std::size_t iy = (index / linear_count) % linear_count;
  const std::size_t iyaw = index / (linear_count * linear_count);
  return {static_cast<long>(ix) - linear_half, static_cast<long>(iy) - linear_half,
          static_cast<long>(iyaw) - yaw_half};
}
}  // namespace

Pose2 SearchGrid::pose(std::size_t index) const {
  const GridIndex k = decompose(index, linear_count_, linear_half_, yaw_half_);
  return {spec_.center.x() + static_cast<double>(k.kx) * spec_.linear_step,
          spec_.center.y() + static_cast<double>(k.ky) * spec_.linear_step,
          spec_.center_yaw + static_cast<double>(k.kyaw) * spec_.yaw_step};
}

double SearchGrid::position_offset(std::size_t index) const {
  const GridIndex k = decompose(index, linear_count_, linear_half_, yaw_half_);
  return static_cast<double>(std::labs(k.kx) + std::labs(k.ky)) * spec_.linear_step;
}

double SearchGrid::yaw_offset(std::size_t index) const {
  const GridIndex k = decompose(index, linear_count_, linear_half_, yaw_half_);
  return static_cast<double>(std::labs(k.kyaw)) * spec_.yaw_step;
}

namespace {

struct Best {
  double cost = kInf;
  double position_offset = kInf;
  double yaw_offset = kInf;
  std::size_t index = std::numeric_limits<std::size_t>::max();
  CandidateResult result;

  bool better_than(const Best& other) const {
    if (cost != other.cost) return cost < other.cost;
    if (position_offset != other.position_offset) return position_offset < other.position_offset;
    if (yaw_offset != other.yaw_offset) return yaw_offset < other.yaw_offset;
    return index < other.index;
  }
};

}  // namespace

CandidateResult optimize(const SearchSpec& spec, const HeightMap& map, const FootGeometry& foot,
                         const CostWeights& weights, const OptimizeOptions& options) {
  weights.validate();
  const SearchGrid grid(spec, foot);
  const unsigned threads = options.threads == 0 ? default_thread_count() : options.threads;

  std::vector<Best> partial(threads);
  parallel_chunks(grid.size(), threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Best local;
    for (std::size_t i = begin; i < end; ++i) {
      CandidateResult r = total_cost(grid.pose(i), spec, map, foot, weights);
      if (!r.feasible) continue;
      Best candidate{r.total_cost, grid.position_offset(i), grid.yaw_offset(i), i, r};
      if (candidate.better_than(local)) local = std::move(candidate);
    }
    partial[chunk] = std::move(local);
  });

  std::optional<Best> best;
  for (auto& p : partial) {
    if (p.index == std::numeric_limits<std::size_t>::max()) continue;
    if (!best || p.better_than(*best)) best = std::move(p);
  }
  if (!best) throw NoSteppableRegion();
  return best->result;
}

}  // namespace stepstream
