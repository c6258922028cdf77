#include "stepstream/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace stepstream {

using nlohmann::json;

namespace {

RobotFoot default_robot_foot(FootSide side, const RetargetConfig& config) {
  return {Pose2(0.0, 0.5 * lateral_sign(side) * config.limits.min_lateral_separation, 0.0), 0.0};
}

std::string_view to_string(StepEvent e) {
  switch (e) {
    case StepEvent::None: return "none";
    case StepEvent::Started: return "started";
    case StepEvent::Finished: return "finished";
  }
  return "none";
}

}  // namespace

FootstepStreamer::FootstepStreamer(const RetargetConfig& config)
    : FootstepStreamer(config, default_robot_foot(FootSide::Left, config), default_robot_foot(FootSide::Right, config)) {}

FootstepStreamer::FootstepStreamer(const RetargetConfig& config, RobotFoot left, RobotFoot right)
    : config_(config),
      retargeters_{StepRetargeter(FootSide::Left, config), StepRetargeter(FootSide::Right, config)},
      robot_{left, right} {}

FootstepStreamer::Output FootstepStreamer::process(FootSide side, const TrackerSample& sample) {
  const std::size_t i = index(side);
  Output out;
  out.side = side;
  out.update = retargeters_[i].update(sample);
  user_pose_[i] = sample.pose;
  if (out.update.event == StepEvent::Started) step_index_[i] = next_step_index_++;

  if (out.update.stepping && out.update.estimate.direction) {
    const std::size_t stance = index(opposite(side));
    const Pose3& lift_off = out.update.lift_off;
    Pose3 user_stance;
    if (user_pose_[stance]) {
      user_stance = *user_pose_[stance];
    } else {
      // No stance tracker yet: assume it rests at the home offset from the lift-off pose.
      const Pose2 home = lift_off.planar().compose(Pose2(0.0, -lateral_sign(side) * config_.limits.min_lateral_separation, 0.0));
      user_stance = Pose3::from_xyz_yaw(home.x, home.y, lift_off.position.z(), home.yaw);
    }
    FootstepCommand command = compose_footstep(out.update.estimate, lift_off, user_stance, robot_[stance].pose,
                                               robot_[stance].height, side, config_.limits);
    command.step_index = step_index_[i];
    command.user_step_start = retargeters_[i].state().start_time;
    robot_[i] = {command.pose, command.height};
    out.command = command;
  }
  return out;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message, std::size_t line) {
  json record = {{"error", kind}, {"message", message}};
  if (line) record["line"] = line;
  err << record.dump() << '\n';
}

int run_retarget(std::istream& in, std::ostream& out, std::ostream& err, const PipelineConfig& config) {
  FootstepStreamer streamer(config.retarget);
  TrackerStreamNormalizer normalizer;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    TrackerRecord record;
    TrackerSample sample;
    try {
      record = tracker_record_from_json(json::parse(text));
      sample = normalizer.normalize(record, line);
    } catch (const json::exception& e) {
      report_error(err, "invalid_input", std::string("malformed JSON: ") + e.what(), line);
      return kExitInvalidInput;
    } catch (const FormatError& e) {
      report_error(err, "invalid_input", e.what(), line);
      return kExitInvalidInput;
    }

    const auto result = streamer.process(record.side, sample);
    const auto& state = streamer.retargeter(record.side).state();
    json row = {{"t", sample.time},
                {"side", std::string(to_string(record.side))},
                {"event", std::string(to_string(result.update.event))},
                {"phase", state.phase == StepPhase::Stepping ? "stepping" : "idle"},
                {"estimate", to_json(result.update.estimate)}};
    row["footstep"] = result.command ? to_json(*result.command) : json(nullptr);
    out << row.dump() << '\n';
  }
  return kExitOk;
}

int run_heightmap(const HeightmapJob& job, std::ostream& err, const PipelineConfig& config) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(job.depth_dir)) {
    report_error(err, "invalid_input", "depth directory '" + job.depth_dir.string() + "' does not exist");
    return kExitInvalidInput;
  }
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(job.depth_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") stems.push_back(entry.path().stem().string());
  }
  std::sort(stems.begin(), stems.end());
  if (stems.empty()) {
    report_error(err, "invalid_input", "no depth frames to fuse");
    return kExitInvalidInput;
  }

  try {
    std::optional<CameraIntrinsics> default_intrinsics;
    if (job.intrinsics) {
      std::ifstream in(*job.intrinsics);
      if (!in) throw FormatError("cannot open intrinsics '" + job.intrinsics->string() + "'");
      default_intrinsics = intrinsics_from_json(json::parse(in));
    }
    json pose_overrides = json::object();
    if (job.poses) {
      std::ifstream in(*job.poses);
      if (!in) throw FormatError("cannot open poses '" + job.poses->string() + "'");
      pose_overrides = json::parse(in);
      if (!pose_overrides.is_object()) throw FormatError("poses file must map frame names to poses");
    }

    const auto& g = config.global_grid;
    HeightMapFuser fuser(HeightMap(g.width, g.height, g.resolution, g.origin, MapFrame::World), config.fusion);
    for (const auto& stem : stems) {
      DepthFrameFile file = load_depth_frame(job.depth_dir, stem);
      if (pose_overrides.contains(stem)) file.frame.camera_pose = pose3_from_json(pose_overrides.at(stem));
      const auto intr = file.intrinsics ? file.intrinsics : default_intrinsics;
      if (!intr) throw FormatError("no intrinsics for frame '" + stem + "'");
      if (file.frame.depth.size() != static_cast<std::size_t>(intr->width) * static_cast<std::size_t>(intr->height)) {
        throw FormatError("frame '" + stem + "' does not match the intrinsics dimensions");
      }
      const HeightMap local = extract_local(file.frame, *intr, config.local_grid);
      fuser.integrate(local, local_frame_of(file.frame.camera_pose));
    }
    save_hm1(job.output, fuser.filtered());
  } catch (const FormatError& e) {
    report_error(err, "invalid_input", e.what(), e.line());
    return kExitInvalidInput;
  } catch (const json::exception& e) {
    report_error(err, "invalid_input", e.what());
    return kExitInvalidInput;
  }
  return kExitOk;
}

int run_adjust(const AdjustJob& job, std::ostream& report, std::ostream& err, const PipelineConfig& config) {
  HeightMap map;
  std::vector<FootstepCommand> footsteps;
  try {
    map = load_hm1(job.map);
    std::ifstream in(job.footsteps);
    if (!in) throw FormatError("cannot open footsteps '" + job.footsteps.string() + "'");
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
      ++line;
      if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        footsteps.push_back(footstep_from_json(json::parse(text)));
      } catch (const json::exception& e) {
        throw FormatError(std::string("malformed JSON: ") + e.what(), line);
      } catch (const FormatError& e) {
        throw FormatError(e.what(), line);
      }
    }
  } catch (const FormatError& e) {
    report_error(err, "invalid_input", e.what(), e.line());
    return kExitInvalidInput;
  }

  std::ofstream out(job.output);
  if (!out) {
    report_error(err, "invalid_input", "cannot write '" + job.output.string() + "'");
    return kExitInvalidInput;
  }

  std::size_t evaluated = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < footsteps.size(); ++i) {
    const FootstepCommand& input = footsteps[i];
    const SearchSpec spec = config.search.apply(make_search_spec(input, map));
    evaluated += SearchGrid(spec, config.foot).size();
    json record = {{"index", i}, {"side", std::string(to_string(input.side))}, {"input", to_json(input)}};
    try {
      const CandidateResult best = optimize(spec, map, config.foot, config.weights, {config.threads});
      record["status"] = "ok";
      record["result"] = to_json(best);
    } catch (const NoSteppableRegion&) {
      record["status"] = "no_steppable_region";
    }
    out << record.dump() << '\n';
  }
  const double wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  if (job.bench) {
    json bench = {{"records", footsteps.size()}, {"candidates", evaluated}, {"wall_ms", wall_ms}};
    bench["candidates_per_second"] = wall_ms > 0 ? static_cast<double>(evaluated) / (wall_ms * 1e-3) : 0.0;
    report << bench.dump() << '\n';
  }
  return kExitOk;
}

Scenario scenario_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw FormatError("scenario must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    static const std::vector<std::string> known = {"seed", "config", "map", "robot_start", "events"};
    if (std::find(known.begin(), known.end(), key) == known.end()) throw FormatError("unknown scenario key '" + key + "'");
  }

  Scenario s;
  try {
    if (doc.contains("seed")) s.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("config")) s.config = doc.at("config");
    if (doc.contains("map")) {
      std::filesystem::path p = doc.at("map").get<std::string>();
      s.map = p.is_relative() ? base_dir / p : p;
    }
    if (doc.contains("robot_start")) {
      const json& rs = doc.at("robot_start");
      auto foot = [&](const char* key) -> std::optional<RobotFoot> {
        if (!rs.contains(key)) return std::nullopt;
        const auto v = rs.at(key).get<std::vector<double>>();
        if (v.size() != 3 && v.size() != 4) throw FormatError("robot_start entries are [x, y, yaw(, height)]");
        return RobotFoot{Pose2(v[0], v[1], v[2]), v.size() == 4 ? v[3] : 0.0};
      };
      s.robot_left = foot("left");
      s.robot_right = foot("right");
    }
    if (!doc.contains("events") || !doc.at("events").is_array()) throw FormatError("scenario needs an events array");
    std::size_t n = 0;
    for (const auto& e : doc.at("events")) {
      ++n;
      Scenario::Event event;
      const std::string type = e.value("type", std::string("tracker"));
      if (type == "tracker") {
        event.kind = Scenario::Event::Kind::Tracker;
        event.tracker = tracker_record_from_json(e.contains("sample") ? e.at("sample") : e);
        event.time = event.tracker.sample.time;
      } else if (type == "stability") {
        event.kind = Scenario::Event::Kind::Stability;
        event.time = e.at("t").get<double>();
        event.score = e.at("score").get<double>();
        if (!(event.score >= 0 && event.score <= 1)) throw FormatError("stability score must lie in [0, 1]", n);
      } else {
        throw FormatError("unknown event type '" + type + "'", n);
      }
      if (!s.events.empty() && event.time < s.events.back().time) throw FormatError("events must be time ordered", n);
      s.events.push_back(event);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("scenario schema violation: ") + e.what());
  }
  return s;
}

SimulationResult simulate(const Scenario& scenario, const PipelineConfig& config, const HeightMap* map) {
  const RetargetConfig& rc = config.retarget;
  FootstepStreamer streamer(rc, scenario.robot_left.value_or(default_robot_foot(FootSide::Left, rc)),
                            scenario.robot_right.value_or(default_robot_foot(FootSide::Right, rc)));
  WalkSimulator sim(config.timing, scenario.seed.value_or(config.seed));
  TrackerStreamNormalizer normalizer;
  SimulationResult result;

  std::optional<FootstepCommand> outstanding;
  bool delivered = false;
  std::size_t executed_seen = 0;

  auto offer = [&](double now) {
    const EnqueueStatus status = sim.enqueue_footstep(*outstanding, now);
    switch (status) {
      case EnqueueStatus::Started:
      case EnqueueStatus::Replaced:
      case EnqueueStatus::Queued: delivered = true; break;
      case EnqueueStatus::Rejected:
        delivered = false;
        ++result.rejected_commands;
        break;
      case EnqueueStatus::Stale: outstanding.reset(); break;
    }
  };
  auto advance = [&](double now) {
    sim.tick(now);
    for (; executed_seen < sim.log().size(); ++executed_seen) {
      const FootstepCommand& done = sim.log()[executed_seen].executed;
      streamer.set_robot_foot(done.side, {done.pose, done.height});
    }
    if (outstanding && !delivered) offer(now);
  };

  double now = 0.0;
  for (const auto& event : scenario.events) {
    now = event.time;
    advance(now);
    if (event.kind == Scenario::Event::Kind::Stability) {
      sim.set_stability_score(event.score);
      continue;
    }
    const TrackerSample sample = normalizer.normalize(event.tracker);
    auto out = streamer.process(event.tracker.side, sample);
    if (!out.command) continue;

    FootstepCommand command = *out.command;
    if (map) {
      try {
        const SearchSpec spec = config.search.apply(make_search_spec(command, *map));
        const CandidateResult best = optimize(spec, *map, config.foot, config.weights, {config.threads});
        command.pose = best.pose;
        command.height = best.height;
        streamer.set_robot_foot(command.side, {command.pose, command.height});
      } catch (const NoSteppableRegion&) {
        ++result.unadjusted_commands;
      }
    }
    outstanding = command;
    offer(now);
  }

  // Let the robot finish whatever it has been given.
  constexpr double kDrainStep = 0.01;
  const double horizon = now + 10.0 * (config.timing.transfer_max + config.timing.swing_duration) + 1.0;
  while ((sim.phase() != WalkPhase::Standing || (outstanding && !delivered)) && now < horizon) {
    now += kDrainStep;
    advance(now);
  }
  result.log = sim.log();
  return result;
}

void write_sync_csv(std::ostream& out, const SyncLog& log) {
  out << "step,side,user_step_start,command_sent,robot_transfer_start,robot_swing_start,robot_touchdown,"
         "transfer_duration,swing_start_latency,touchdown_latency,x,y,yaw,height\n";
  char buf[512];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%llu,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  static_cast<unsigned long long>(r.step_index), std::string(to_string(r.executed.side)).c_str(),
                  r.user_step_start, r.command_sent, r.robot_transfer_start, r.robot_swing_start, r.robot_touchdown,
                  r.transfer_duration, r.robot_swing_start - r.user_step_start, r.robot_touchdown - r.user_step_start,
                  r.executed.pose.x, r.executed.pose.y, r.executed.pose.yaw, r.executed.height);
    out << buf;
  }
}

json to_json(const SyncStatistics& stats) {
  return {{"steps", stats.steps.size()},
          {"mean_swing_start_latency", stats.mean_swing_start_latency},
          {"max_swing_start_latency", stats.max_swing_start_latency},
          {"mean_touchdown_latency", stats.mean_touchdown_latency},
          {"max_touchdown_latency", stats.max_touchdown_latency}};
}

int run_simulate(const SimulateJob& job, std::ostream& report, std::ostream& err, const PipelineConfig& config) {
  Scenario scenario;
  PipelineConfig effective = config;
  std::optional<HeightMap> map;
  try {
    std::ifstream in(job.scenario);
    if (!in) throw FormatError("cannot open scenario '" + job.scenario.string() + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw FormatError(std::string("scenario is not valid JSON: ") + e.what());
    }
    scenario = scenario_from_json(doc, job.scenario.parent_path());
    if (scenario.config) {
      json merged = to_json(config);
      merged.merge_patch(*scenario.config);
      effective = config_from_json(merged);
    }
    if (scenario.map) map = load_hm1(*scenario.map);
  } catch (const FormatError& e) {
    report_error(err, "invalid_input", e.what(), e.line());
    return kExitInvalidInput;
  } catch (const ConfigError& e) {
    report_error(err, "invalid_input", e.what());
    return kExitInvalidInput;
  }

  SimulationResult result;
  try {
    result = simulate(scenario, effective, map ? &*map : nullptr);
  } catch (const FormatError& e) {
    report_error(err, "invalid_input", e.what(), e.line());
    return kExitInvalidInput;
  }

  std::ofstream out(job.output);
  if (!out) {
    report_error(err, "invalid_input", "cannot write '" + job.output.string() + "'");
    return kExitInvalidInput;
  }
  write_sync_csv(out, result.log);

  json summary = {{"executed_steps", result.log.size()},
                  {"rejected_commands", result.rejected_commands},
                  {"unadjusted_commands", result.unadjusted_commands}};
  if (!result.log.empty()) summary["latency"] = to_json(measure_sync(result.log));
  report << summary.dump() << '\n';
  return kExitOk;
}

int run_swing(const SwingJob& job, std::ostream& err, const PipelineConfig& config) {
  SwingSpec spec;
  spec.initial = job.from;
  spec.goal = job.to;
  spec.initial_yaw = job.from_yaw;
  spec.goal_yaw = job.to_yaw;
  spec.swing_height = config.swing.swing_height;
  spec.alpha_wp1 = config.swing.alpha_wp1;
  spec.alpha_wp2 = config.swing.alpha_wp2;
  spec.duration = config.swing.duration;
  spec.height_threshold = config.swing.height_threshold;

  std::optional<SwingTrajectory> trajectory;
  try {
    const SwingWaypoints waypoints = compute_waypoints(spec);
    if (waypoints.below_goal_warning) {
      report_error(err, "warning", "second waypoint lies below the goal height; consider a larger swing height");
    }
    trajectory.emplace(build_spline(spec, waypoints));
  } catch (const std::invalid_argument& e) {
    report_error(err, "invalid_input", e.what());
    return kExitInvalidInput;
  }

  std::ofstream out(job.output);
  if (!out) {
    report_error(err, "invalid_input", "cannot write '" + job.output.string() + "'");
    return kExitInvalidInput;
  }
  out << "t,x,y,z,vx,vy,vz\n";
  const auto samples = static_cast<long>(std::ceil(spec.duration * config.swing.sample_rate));
  char buf[256];
  for (long i = 0; i <= samples; ++i) {
    const double t = spec.duration * static_cast<double>(i) / static_cast<double>(samples);
    const SwingState s = trajectory->sample(t);
    std::snprintf(buf, sizeof buf, "%.6f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f\n", t, s.position.x(), s.position.y(),
                  s.position.z(), s.velocity.x(), s.velocity.y(), s.velocity.z());
    out << buf;
  }
  return kExitOk;
}

}  // namespace stepstream
