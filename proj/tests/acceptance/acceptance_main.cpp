// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "stepstream/footstep_optimizer.hpp"
#include "stepstream/geometry.hpp"
#include "stepstream/heightmap.hpp"
#include "stepstream/parallel.hpp"
#include "stepstream/pipeline.hpp"
#include "stepstream/step_retarget.hpp"
#include "stepstream/swing_trajectory.hpp"

#include "oracles.hpp"
#include "synthetic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace stepstream;
using namespace stepstream::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

constexpr double kDeg = std::numbers::pi / 180.0;

double time_ms(const std::function<void()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

// 1. Parallel optimizer equals sequential enumeration; runtime of the full grid.
Outcome optimizer_equivalence() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const FootGeometry foot;
  const CostWeights weights;
  int maps = 0, mismatches = 0, infeasible = 0;
  for (int trial = 0; trial < 52; ++trial) {
    const HeightMap map = random_terrain(static_cast<TerrainKind>(trial % 4), rng);
    SearchSpec spec;
    spec.center = {0.3 * u(rng), 0.3 * u(rng)};
    spec.center_yaw = u(rng);
    spec.target_height = map.lookup(spec.center);
    if (std::isnan(spec.target_height)) spec.target_height = 0.0;
    const BruteForceResult oracle = brute_force_optimize(spec, map, foot, weights);
    ++maps;
    if (oracle.index == SearchGrid(spec, foot).size()) {
      ++infeasible;
      continue;
    }
    for (unsigned threads : {0u, 3u, 8u}) {
      const CandidateResult r = optimize(spec, map, foot, weights, {threads});
      if (r.pose.x != oracle.result.pose.x || r.pose.y != oracle.result.pose.y || r.pose.yaw != oracle.result.pose.yaw ||
          r.total_cost != oracle.result.total_cost) {
        ++mismatches;
      }
    }
  }

  // Runtime: the default grid, and a denser grid above 1e5 candidates.
  std::mt19937_64 map_rng(7);
  const HeightMap map = random_terrain(TerrainKind::Noisy, map_rng);
  SearchSpec spec;
  const std::size_t default_size = SearchGrid(spec, foot).size();
  double default_ms = 1e9;
  for (int i = 0; i < 3; ++i) default_ms = std::min(default_ms, time_ms([&] { optimize(spec, map, foot, weights); }));
  SearchSpec dense = spec;
  dense.linear_step = 0.01;
  const std::size_t dense_size = SearchGrid(dense, foot).size();
  double dense_ms = 1e9;
  for (int i = 0; i < 3; ++i) dense_ms = std::min(dense_ms, time_ms([&] { optimize(dense, map, foot, weights); }));

  Outcome o;
  o.pass = mismatches == 0 && maps >= 50 && infeasible == 0 && dense_size > 100000 && default_ms < 200.0 &&
           dense_ms < 200.0;
  o.detail = fmt("%d maps, %d mismatches, %d without a feasible candidate; default grid %zu candidates in %.1f ms, "
                 "dense grid %zu candidates in %.1f ms (%.2e candidates/s, %u hardware threads)",
                 maps, mismatches, infeasible, default_size, default_ms, dense_size, dense_ms,
                 dense_size / (dense_ms * 1e-3), default_thread_count());
  return o;
}

// 2. Weighted cost point checks on flat terrain.
Outcome cost_point_checks() {
  const HeightMap map = make_map(100, 100, 0.02, {-1.0, -1.0}, [](double, double) { return 0.0; });
  const SearchSpec spec;
  const double jx = total_cost(Pose2(0.1, 0.0, 0.0), spec, map, FootGeometry{}, CostWeights{}).total_cost;
  const double jyaw = total_cost(Pose2(0.0, 0.0, 0.1), spec, map, FootGeometry{}, CostWeights{}).total_cost;
  return {jx == 1.0 && jyaw == 3.0, fmt("J(0.1 m x) = %.17g, J(0.1 rad yaw) = %.17g", jx, jyaw)};
}

// 3. Slope and variance penalties flip at their limits.
Outcome planarity_thresholds() {
  const CostWeights w;
  bool ok = true;
  std::ostringstream detail;

  // Ramps sampled from a height map whose cells sit under the stencil points.
  const FootGeometry foot{0.24, 0.12};
  for (double deg : {49.0, 51.0}) {
    const double g = std::tan(deg * kDeg);
    const HeightMap ramp = make_map(100, 100, 0.02, {-1.0, -1.0}, [=](double x, double) { return g * x; });
    const PlanarityReport r = planarity_cost(Pose2(0.0, 0.0, 0.0), foot, ramp, w);
    const bool penalized = r.cost >= w.slope_penalty;
    ok = ok && r.continuous && penalized == (deg > 50.0) && std::abs(r.plane.slope - deg * kDeg) < 1e-9;
    detail << fmt("ramp %.0f deg: slope %.9f deg, cost %.6f; ", deg, r.plane.slope / kDeg, r.cost);
  }

  // Twisted stencil: max deviation proportional to the twist amplitude.
  const FootStencil s = sample_points(Pose2(), FootGeometry{});
  auto heights = [](double b) { return std::array<double, 5>{b, 0.0, 0.0, -b, 0.0}; };
  std::array<Eigen::Vector3d, 5> unit;
  for (int k = 0; k < 5; ++k) unit[k] = {s[k].x(), s[k].y(), heights(1.0)[k]};
  double gain = 0.0;
  for (double r : plane_oracle(unit).residuals) gain = std::max(gain, std::abs(r));
  for (double target : {0.049, 0.051}) {
    const PlanarityReport r = evaluate_planarity(s, heights(target / gain), w);
    const bool penalized = r.cost >= w.variance_penalty;
    ok = ok && r.continuous && penalized == (target > 0.05) && std::abs(r.plane.max_deviation - target) < 1e-12 &&
         r.plane.slope < w.slope_limit;
    detail << fmt("bump %.1f cm: max deviation %.6f m, cost %.6f; ", target * 100, r.plane.max_deviation, r.cost);
  }
  std::string d = detail.str();
  d.resize(d.size() - 2);
  return {ok, d};
}

// 4. Plane fit on exact planes.
Outcome plane_fit_exactness() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), pos(-1.0, 1.0), yaw(-3.1, 3.1);
  double worst_coef = 0.0, worst_slope = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double a = coef(rng), b = coef(rng), c = coef(rng);
    const FootStencil st = sample_points(Pose2(pos(rng), pos(rng), yaw(rng)), FootGeometry{});
    std::array<Eigen::Vector3d, 5> pts;
    for (int k = 0; k < 5; ++k) pts[k] = {st[k].x(), st[k].y(), a * st[k].x() + b * st[k].y() + c};
    const PlaneFit f = fit_plane(pts);
    worst_coef = std::max({worst_coef, std::abs(f.alpha - a), std::abs(f.beta - b), std::abs(f.gamma - c)});
    worst_slope = std::max(worst_slope, std::abs(f.slope - std::atan(std::sqrt(a * a + b * b))));
  }
  return {worst_coef <= 1e-9 && worst_slope <= 1e-9,
          fmt("10000 planes, worst coefficient error %.2e, worst slope error %.2e", worst_coef, worst_slope)};
}

// 5. Stride estimate converges to the landed displacement.
Outcome stride_convergence() {
  WalkSpec spec;
  spec.steps = 1;
  spec.stride = 0.6;  // first step covers 0.3 m
  const WalkStream walk = straight_walk(spec);
  const double truth = (walk.steps[0].landing - walk.steps[0].start).norm();

  auto run = [&](double kp, double* at_touchdown, double* after_touchdown) {
    RetargetConfig config;
    config.kp_stride = kp;
    StepRetargeter r(FootSide::Left, config);
    int since_landing = -1;
    double final_stride = -1.0;
    for (const auto& rec : walk.records) {
      if (rec.side != FootSide::Left) continue;
      const auto u = r.update(rec.sample);
      if (u.stepping && since_landing >= 0) ++since_landing;
      if (u.stepping && since_landing < 0 && u.estimate.landing_factor == 0.0) {
        since_landing = 0;
        if (at_touchdown) *at_touchdown = u.estimate.stride;
      }
      if (since_landing == 1 && after_touchdown) *after_touchdown = u.estimate.stride;
      if (u.event == StepEvent::Finished) final_stride = u.estimate.stride;
    }
    return final_stride;
  };

  const double final_default = run(0.3, nullptr, nullptr);
  double touchdown = -1.0, next = -1.0;
  run(1.0, &touchdown, &next);
  const bool unit_gain_ok = std::abs(touchdown - truth) <= 1e-3 || std::abs(next - truth) <= 1e-3;
  return {std::abs(final_default - truth) <= 1e-3 && unit_gain_ok,
          fmt("true %.4f m; final estimate %.6f m (kP 0.3); kP 1: %.6f m at landing, %.6f m one update later", truth,
              final_default, touchdown, next)};
}

// 6. Landing factor.
Outcome landing_factor_checks() {
  int violations = 0, states = 0;
  for (int iz = -20; iz <= 40; ++iz) {
    for (int izd = 0; izd <= 20; ++izd) {
      for (int im = 0; im <= 20; ++im) {
        ++states;
        if (landing_factor(0.005 * iz, 0.05 * izd, 0.01 * im) != 1.0) ++violations;
      }
    }
  }
  const double zmax = 0.08;
  const bool pointwise = landing_factor(0.0, -0.1, zmax) == 0.0 && landing_factor(0.25 * zmax, -0.1, zmax) == 0.25 &&
                         landing_factor(0.5 * zmax, -0.1, zmax) == 0.5 && landing_factor(zmax, -0.1, zmax) == 1.0;
  return {violations == 0 && pointwise,
          fmt("%d non-descending states, %d violations; pointwise checks %s", states, violations,
              pointwise ? "exact" : "off")};
}

// 7. Height map fusion.
Outcome fusion_checks() {
  FusionConfig config;
  HeightMap global(5, 5, 0.1, {-0.2, -0.2});
  global.fill(1.0);
  HeightMap local(11, 11, 0.1, {-0.5, -0.5}, MapFrame::LocalYawAligned);
  local.fill(0.0);
  double worst_decay = 0.0;
  for (int n = 1; n <= 50; ++n) {
    fuse_global(global, local, Pose2(), config);
    for (double h : global.heights()) worst_decay = std::max(worst_decay, std::abs(h - std::pow(config.alpha, n)));
  }

  const CameraIntrinsics intr = small_intrinsics();
  const DepthFrame frame = render_depth(intr, downward_camera(0.2, 0.1, 1.5, 0.5), [](double, double) { return 0.0; });
  LocalGridSpec grid;
  grid.width = 31;
  grid.height = 41;
  grid.origin = {-0.3, -0.4};
  const HeightMap flat = extract_local(frame, intr, grid);
  double worst_flat = 0.0;
  int unknown = 0;
  for (double h : flat.heights()) {
    if (std::isnan(h)) ++unknown;
    else worst_flat = std::max(worst_flat, std::abs(h));
  }

  HeightMap spiky(9, 9, 0.02, {0, 0});
  for (int r = 0; r < 9; ++r) {
    for (int c = 0; c < 9; ++c) spiky.at(c, r) = (c + r) * 0.0078125;
  }
  const double expected = spiky.at(4, 4);
  spiky.at(4, 4) += 0.25;
  const HeightMap cleaned = remove_outliers(spiky, config);
  const bool spike_ok = cleaned.at(4, 4) == expected;

  return {worst_decay <= 1e-12 && worst_flat <= 1e-6 && unknown == 0 && spike_ok,
          fmt("alpha^n decay error %.2e over 50 fusions; flat floor max |z| %.2e m (%d unknown cells); spike %s",
              worst_decay, worst_flat, unknown, spike_ok ? "replaced by neighbor mean" : "not replaced")};
}

// 8. Projection round trip.
Outcome projection_round_trip() {
  const CameraIntrinsics intr{525.0, 525.0, 319.5, 239.5, 640, 480};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> xy(-2.0, 2.0), z(0.1, 6.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector3d p(xy(rng), xy(rng), z(rng));
    const Eigen::Vector2d uv = project(p, intr);
    const auto back = unproject(uv.x(), uv.y(), p.z(), intr);
    worst = std::max(worst, back ? (*back - p).norm() : 1e9);
  }
  return {worst <= 1e-9, fmt("10000 points, worst error %.2e m", worst)};
}

// 9. Swing waypoints and spline.
Outcome swing_checks() {
  SwingSpec level;
  level.goal = {0.4, 0.0, 0.0};
  SwingSpec up = level;
  up.goal.z() = 0.2;
  const SwingWaypoints wl = compute_waypoints(level), wu = compute_waypoints(up);
  const bool examples = wl.first.z() == 0.1 && wl.second.z() == 0.1 && std::abs(wu.first.z() - 0.13) < 1e-12 &&
                        std::abs(wu.second.z() - 0.10) < 1e-12;

  double knot_err = 0.0, end_vel = 0.0, c1 = 0.0;
  SwingSpec down = level;
  down.initial.z() = 0.2;
  for (const SwingSpec& spec : {level, up, down}) {
    const SwingTrajectory t = build_spline(spec, compute_waypoints(spec));
    for (std::size_t k = 0; k < SwingTrajectory::kKnots; ++k) {
      knot_err = std::max(knot_err, (t.sample(t.knot_times()[k]).position - t.knots()[k]).norm());
    }
    end_vel = std::max({end_vel, t.sample(0.0).velocity.norm(), t.sample(spec.duration).velocity.norm()});
    for (std::size_t k = 1; k + 1 < SwingTrajectory::kKnots; ++k) {
      c1 = std::max(c1, (t.knot_velocity_from(k, true) - t.knot_velocity_from(k, false)).norm());
    }
  }
  return {examples && knot_err <= 1e-9 && end_vel <= 1e-9 && c1 <= 1e-9,
          fmt("level wp z (%.3f, %.3f), step-up wp z (%.3f, %.3f); knot error %.2e, end velocity %.2e, C1 jump %.2e",
              wl.first.z(), wl.second.z(), wu.first.z(), wu.second.z(), knot_err, end_vel, c1)};
}

// 10. End-to-end ten-step simulation.
Outcome simulation_checks() {
  WalkSpec spec;
  spec.steps = 10;
  spec.rest_time = 1.5;
  const nlohmann::json doc = walk_scenario(straight_walk(spec), 77);
  const PipelineConfig config;
  auto run = [&] {
    const SimulationResult r = simulate(scenario_from_json(doc), config, nullptr);
    std::ostringstream csv;
    write_sync_csv(csv, r.log);
    return std::pair{r, csv.str()};
  };
  const auto [first, csv_a] = run();
  const auto [second, csv_b] = run();

  int bad_transfer = 0, bad_latency = 0;
  double min_transfer = 1e9, max_transfer = 0.0;
  for (const auto& rec : first.log) {
    min_transfer = std::min(min_transfer, rec.transfer_duration);
    max_transfer = std::max(max_transfer, rec.transfer_duration);
    if (rec.transfer_duration < 0.15 || rec.transfer_duration > 1.0) ++bad_transfer;
    const double command_latency = rec.robot_transfer_start - rec.user_step_start;
    if (std::abs((rec.robot_swing_start - rec.user_step_start) - (command_latency + rec.transfer_duration)) > 1e-12) {
      ++bad_latency;
    }
  }
  const bool identical = csv_a == csv_b;
  return {first.log.size() == 10 && bad_transfer == 0 && bad_latency == 0 && identical,
          fmt("%zu steps executed, transfers in [%.3f, %.3f] s, %d latency mismatches, reruns %s", first.log.size(),
              min_transfer, max_transfer, bad_latency, identical ? "byte-identical" : "differ")};
}

// 11. Safety clamps.
Outcome safety_clamps() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), yaw(-std::numbers::pi, std::numbers::pi);
  const SafetyLimits limits;
  int violations = 0, non_idempotent = 0;
  for (int i = 0; i < 10000; ++i) {
    const FootSide side = i % 2 ? FootSide::Left : FootSide::Right;
    const Pose2 c = clamp_footstep(Pose2(pos(rng), pos(rng), yaw(rng)), side, limits);
    if (!satisfies_limits(c, side, limits)) ++violations;
    const Pose2 cc = clamp_footstep(c, side, limits);
    if (cc.x != c.x || cc.y != c.y || cc.yaw != c.yaw) ++non_idempotent;
  }
  return {violations == 0 && non_idempotent == 0,
          fmt("10000 cases, %d limit violations, %d non-idempotent", violations, non_idempotent)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"optimizer oracle equivalence and runtime", optimizer_equivalence},
      {"cost function point checks", cost_point_checks},
      {"planarity thresholds", planarity_thresholds},
      {"plane fit exactness", plane_fit_exactness},
      {"stride estimator convergence", stride_convergence},
      {"landing factor", landing_factor_checks},
      {"height map fusion", fusion_checks},
      {"projection round trip", projection_round_trip},
      {"swing trajectory", swing_checks},
      {"end-to-end simulation", simulation_checks},
      {"safety clamps", safety_clamps},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
