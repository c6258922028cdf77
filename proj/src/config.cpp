#include "stepstream/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace stepstream {

using nlohmann::json;

SearchSpec SearchSettings::apply(SearchSpec spec) const {
  spec.radius_factor = radius_factor;
  spec.yaw_half_range = yaw_half_range;
  spec.linear_step = linear_step;
  spec.yaw_step = yaw_step;
  return spec;
}

void PipelineConfig::validate() const {
  retarget.validate();
  fusion.validate();
  weights.validate();
  foot.validate();
  SearchSpec probe = search.apply({});
  probe.validate();
  timing.validate();
  if (local_grid.width <= 0 || local_grid.height <= 0 || !(local_grid.resolution > 0)) {
    throw std::invalid_argument("local grid must have positive size and resolution");
  }
  if (global_grid.width <= 0 || global_grid.height <= 0 || !(global_grid.resolution > 0)) {
    throw std::invalid_argument("global grid must have positive size and resolution");
  }
  if (!(swing.sample_rate > 0)) throw std::invalid_argument("swing sample rate must be positive");
}

namespace {

json vec2(const Eigen::Vector2d& v) { return json::array({v.x(), v.y()}); }

// Reads the keys of one JSON object section, rejecting anything it was not asked for.
class Section {
 public:
  Section(const json& doc, std::string name) : doc_(doc), name_(std::move(name)) {
    if (!doc_.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
  }
  /// Call after all reads; rejects keys nobody asked for.
  void done() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + name_ + "." + key + "'");
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!doc_.contains(key)) return;
    try {
      out = doc_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + name_ + "." + key + "': " + e.what());
    }
  }

  void read_vec2(const char* key, Eigen::Vector2d& out) {
    std::vector<double> v{out.x(), out.y()};
    read(key, v);
    if (v.size() != 2) throw ConfigError("'" + name_ + "." + key + "' must have two entries");
    out = {v[0], v[1]};
  }

  bool has(const char* key) {
    seen_.insert(key);
    return doc_.contains(key);
  }
  const json& at(const char* key) const { return doc_.at(key); }

 private:
  const json& doc_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

json to_json(const PipelineConfig& c) {
  json exclusion = json::array();
  for (const auto& r : c.fusion.exclusion_mask) exclusion.push_back({{"min", vec2(r.min)}, {"max", vec2(r.max)}});
  return {
      {"retarget",
       {{"step_threshold", c.retarget.step_threshold},
        {"lift_threshold", c.retarget.lift_threshold},
        {"stability_threshold", c.retarget.stability_threshold},
        {"stability_iterations", c.retarget.stability_iterations},
        {"step_duration", c.retarget.step_duration},
        {"kp_stride", c.retarget.kp_stride},
        {"kp_yaw", c.retarget.kp_yaw}}},
      {"limits",
       {{"max_stride", c.retarget.limits.max_stride},
        {"max_yaw", c.retarget.limits.max_yaw},
        {"min_lateral_separation", c.retarget.limits.min_lateral_separation},
        {"max_inward_yaw", c.retarget.limits.max_inward_yaw}}},
      {"fusion",
       {{"alpha", c.fusion.alpha},
        {"ema_alpha", c.fusion.ema_alpha},
        {"outlier_distance", c.fusion.outlier_distance},
        {"neighborhood_radius", c.fusion.neighborhood_radius},
        {"exclusion_mask", exclusion}}},
      {"local_grid",
       {{"width", c.local_grid.width},
        {"height", c.local_grid.height},
        {"resolution", c.local_grid.resolution},
        {"origin", vec2(c.local_grid.origin)},
        {"pixel_radius", c.local_grid.pixel_radius},
        {"reference_height", c.local_grid.reference_height},
        {"projection_passes", c.local_grid.projection_passes}}},
      {"global_grid",
       {{"width", c.global_grid.width},
        {"height", c.global_grid.height},
        {"resolution", c.global_grid.resolution},
        {"origin", vec2(c.global_grid.origin)}}},
      {"weights",
       {{"position", c.weights.position},
        {"yaw", c.weights.yaw},
        {"planarity", c.weights.planarity},
        {"height", c.weights.height},
        {"discontinuity", c.weights.discontinuity},
        {"continuity_threshold", c.weights.continuity_threshold},
        {"variance_limit", c.weights.variance_limit},
        {"slope_limit", c.weights.slope_limit},
        {"variance_penalty", c.weights.variance_penalty},
        {"slope_penalty", c.weights.slope_penalty}}},
      {"foot", {{"length", c.foot.length}, {"width", c.foot.width}}},
      {"search",
       {{"radius_factor", c.search.radius_factor},
        {"yaw_half_range", c.search.yaw_half_range},
        {"linear_step", c.search.linear_step},
        {"yaw_step", c.search.yaw_step}}},
      {"swing",
       {{"swing_height", c.swing.swing_height},
        {"alpha_wp1", c.swing.alpha_wp1},
        {"alpha_wp2", c.swing.alpha_wp2},
        {"duration", c.swing.duration},
        {"height_threshold", c.swing.height_threshold},
        {"sample_rate", c.swing.sample_rate}}},
      {"timing",
       {{"transfer_min", c.timing.transfer_min},
        {"transfer_max", c.timing.transfer_max},
        {"swing_duration", c.timing.swing_duration}}},
      {"seed", c.seed},
      {"threads", c.threads},
  };
}

PipelineConfig config_from_json(const json& doc) {
  PipelineConfig c;
  {
    Section root(doc, "<root>");
    root.read("seed", c.seed);
    root.read("threads", c.threads);
    if (root.has("retarget")) {
      Section s(root.at("retarget"), "retarget");
      s.read("step_threshold", c.retarget.step_threshold);
      s.read("lift_threshold", c.retarget.lift_threshold);
      s.read("stability_threshold", c.retarget.stability_threshold);
      s.read("stability_iterations", c.retarget.stability_iterations);
      s.read("step_duration", c.retarget.step_duration);
      s.read("kp_stride", c.retarget.kp_stride);
      s.read("kp_yaw", c.retarget.kp_yaw);
      s.done();
    }
    if (root.has("limits")) {
      Section s(root.at("limits"), "limits");
      s.read("max_stride", c.retarget.limits.max_stride);
      s.read("max_yaw", c.retarget.limits.max_yaw);
      s.read("min_lateral_separation", c.retarget.limits.min_lateral_separation);
      s.read("max_inward_yaw", c.retarget.limits.max_inward_yaw);
      s.done();
    }
    if (root.has("fusion")) {
      Section s(root.at("fusion"), "fusion");
      s.read("alpha", c.fusion.alpha);
      s.read("ema_alpha", c.fusion.ema_alpha);
      s.read("outlier_distance", c.fusion.outlier_distance);
      s.read("neighborhood_radius", c.fusion.neighborhood_radius);
      s.has("exclusion_mask");
      s.done();
      if (s.has("exclusion_mask")) {
        const json& mask = s.at("exclusion_mask");
        if (!mask.is_array()) throw ConfigError("fusion.exclusion_mask must be an array");
        c.fusion.exclusion_mask.clear();
        for (const auto& entry : mask) {
          Section r(entry, "fusion.exclusion_mask[]");
          ExclusionRegion region{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
          r.read_vec2("min", region.min);
          r.read_vec2("max", region.max);
          r.done();
          c.fusion.exclusion_mask.push_back(region);
        }
      }
    }
    if (root.has("local_grid")) {
      Section s(root.at("local_grid"), "local_grid");
      s.read("width", c.local_grid.width);
      s.read("height", c.local_grid.height);
      s.read("resolution", c.local_grid.resolution);
      s.read_vec2("origin", c.local_grid.origin);
      s.read("pixel_radius", c.local_grid.pixel_radius);
      s.read("reference_height", c.local_grid.reference_height);
      s.read("projection_passes", c.local_grid.projection_passes);
      s.done();
    }
    if (root.has("global_grid")) {
      Section s(root.at("global_grid"), "global_grid");
      s.read("width", c.global_grid.width);
      s.read("height", c.global_grid.height);
      s.read("resolution", c.global_grid.resolution);
      s.read_vec2("origin", c.global_grid.origin);
      s.done();
    }
    if (root.has("weights")) {
      Section s(root.at("weights"), "weights");
      s.read("position", c.weights.position);
      s.read("yaw", c.weights.yaw);
      s.read("planarity", c.weights.planarity);
      s.read("height", c.weights.height);
      s.read("discontinuity", c.weights.discontinuity);
      s.read("continuity_threshold", c.weights.continuity_threshold);
      s.read("variance_limit", c.weights.variance_limit);
      s.read("slope_limit", c.weights.slope_limit);
      s.read("variance_penalty", c.weights.variance_penalty);
      s.read("slope_penalty", c.weights.slope_penalty);
      s.done();
    }
    if (root.has("foot")) {
      Section s(root.at("foot"), "foot");
      s.read("length", c.foot.length);
      s.read("width", c.foot.width);
      s.done();
    }
    if (root.has("search")) {
      Section s(root.at("search"), "search");
      s.read("radius_factor", c.search.radius_factor);
      s.read("yaw_half_range", c.search.yaw_half_range);
      s.read("linear_step", c.search.linear_step);
      s.read("yaw_step", c.search.yaw_step);
      s.done();
    }
    if (root.has("swing")) {
      Section s(root.at("swing"), "swing");
      s.read("swing_height", c.swing.swing_height);
      s.read("alpha_wp1", c.swing.alpha_wp1);
      s.read("alpha_wp2", c.swing.alpha_wp2);
      s.read("duration", c.swing.duration);
      s.read("height_threshold", c.swing.height_threshold);
      s.read("sample_rate", c.swing.sample_rate);
      s.done();
    }
    if (root.has("timing")) {
      Section s(root.at("timing"), "timing");
      s.read("transfer_min", c.timing.transfer_min);
      s.read("transfer_max", c.timing.transfer_max);
      s.read("swing_duration", c.timing.swing_duration);
      s.done();
    }
    root.done();
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace stepstream
