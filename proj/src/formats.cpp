#include "stepstream/formats.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace stepstream {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, const char* what) {
  if (token == "nan" || token == "NaN" || token == "NAN") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw FormatError(std::string("invalid ") + what + " '" + token + "'");
  return v;
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad field '") + key + "': " + e.what());
  }
}

Eigen::Vector3d vec3_field(const json& j, const char* key) {
  const auto v = required<std::vector<double>>(j, key);
  if (v.size() != 3) throw FormatError(std::string("field '") + key + "' must have three entries");
  return {v[0], v[1], v[2]};
}

}  // namespace

void write_hm1(std::ostream& out, const HeightMap& map) {
  out << "HM1 " << map.width() << ' ' << map.height() << ' ' << format_double(map.resolution()) << ' '
      << format_double(map.origin().x()) << ' ' << format_double(map.origin().y()) << '\n';
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      if (col) out << ' ';
      out << format_double(map.at(col, row));
    }
    out << '\n';
  }
}

HeightMap read_hm1(std::istream& in) {
  std::string magic, w, h, res, ox, oy;
  if (!(in >> magic >> w >> h >> res >> ox >> oy) || magic != "HM1") throw FormatError("missing HM1 header", 1);
  const double width = parse_double(w, "width"), height = parse_double(h, "height");
  if (!(width >= 1 && height >= 1) || width != std::floor(width) || height != std::floor(height)) {
    throw FormatError("HM1 dimensions must be positive integers", 1);
  }
  HeightMap map;
  try {
    map = HeightMap(static_cast<int>(width), static_cast<int>(height), parse_double(res, "resolution"),
                    {parse_double(ox, "origin"), parse_double(oy, "origin")});
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what(), 1);
  }
  std::string token;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (!(in >> token)) throw FormatError("HM1 body has fewer values than its header declares");
    const double v = parse_double(token, "height");
    if (std::isinf(v)) throw FormatError("HM1 heights must be finite or nan");
    map.heights()[i] = v;
  }
  if (in >> token) throw FormatError("HM1 body has more values than its header declares");
  return map;
}

void save_hm1(const std::filesystem::path& path, const HeightMap& map) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  write_hm1(out, map);
}

HeightMap load_hm1(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open map '" + path.string() + "'");
  return read_hm1(in);
}

CameraIntrinsics intrinsics_from_json(const json& j) {
  CameraIntrinsics intr;
  intr.fx = required<double>(j, "fx");
  intr.fy = required<double>(j, "fy");
  intr.cx = required<double>(j, "cx");
  intr.cy = required<double>(j, "cy");
  intr.width = required<int>(j, "width");
  intr.height = required<int>(j, "height");
  try {
    intr.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return intr;
}

json to_json(const CameraIntrinsics& intr) {
  return {{"fx", intr.fx}, {"fy", intr.fy}, {"cx", intr.cx},
          {"cy", intr.cy}, {"width", intr.width}, {"height", intr.height}};
}

Pose3 pose3_from_json(const json& j) {
  const Eigen::Vector3d position = vec3_field(j, "position");
  const auto q = required<std::vector<double>>(j, "orientation");
  if (q.size() != 4) throw FormatError("orientation must be a [w, x, y, z] quaternion");
  const Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
  if (!(quat.norm() > 1e-9)) throw FormatError("orientation quaternion has zero norm");
  return Pose3::from_quaternion(position, quat);
}

json to_json(const Pose3& pose) {
  const Eigen::Quaterniond q(pose.rotation);
  return {{"position", {pose.position.x(), pose.position.y(), pose.position.z()}},
          {"orientation", {q.w(), q.x(), q.y(), q.z()}}};
}

std::vector<float> read_depth_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open depth frame '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0) throw FormatError("depth frame '" + path.string() + "' is not a float32 array");
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t word;
    std::memcpy(&word, bytes.data() + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big) word = __builtin_bswap32(word);
    std::memcpy(&out[i], &word, 4);
  }
  return out;
}

void write_depth_binary(const std::filesystem::path& path, const std::vector<float>& depth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write depth frame '" + path.string() + "'");
  for (float f : depth) {
    std::uint32_t word;
    std::memcpy(&word, &f, 4);
    if constexpr (std::endian::native == std::endian::big) word = __builtin_bswap32(word);
    out.write(reinterpret_cast<const char*>(&word), 4);
  }
}

DepthFrameFile load_depth_frame(const std::filesystem::path& dir, const std::string& stem) {
  const auto sidecar_path = dir / (stem + ".json");
  std::ifstream sidecar(sidecar_path);
  if (!sidecar) throw FormatError("missing sidecar '" + sidecar_path.string() + "'");
  json meta;
  try {
    meta = json::parse(sidecar);
  } catch (const json::exception& e) {
    throw FormatError("sidecar '" + sidecar_path.string() + "' is not valid JSON: " + e.what());
  }

  DepthFrameFile file;
  file.stem = stem;
  file.frame.timestamp = required<double>(meta, "timestamp");
  if (!meta.contains("camera_pose")) throw FormatError("sidecar '" + sidecar_path.string() + "' lacks camera_pose");
  file.frame.camera_pose = pose3_from_json(meta.at("camera_pose"));
  if (meta.contains("intrinsics")) file.intrinsics = intrinsics_from_json(meta.at("intrinsics"));
  file.frame.depth = read_depth_binary(dir / (stem + ".bin"));
  return file;
}

void save_depth_frame(const std::filesystem::path& dir, const std::string& stem, const DepthFrame& frame,
                      const std::optional<CameraIntrinsics>& intrinsics) {
  write_depth_binary(dir / (stem + ".bin"), frame.depth);
  json meta = {{"timestamp", frame.timestamp}, {"camera_pose", to_json(frame.camera_pose)}};
  if (intrinsics) meta["intrinsics"] = to_json(*intrinsics);
  std::ofstream out(dir / (stem + ".json"));
  out << meta.dump(2) << '\n';
}

TrackerRecord tracker_record_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("tracker record must be a JSON object");
  TrackerRecord r;
  r.sample.time = required<double>(j, "t");
  if (!std::isfinite(r.sample.time)) throw FormatError("tracker time must be finite");
  try {
    r.side = foot_side_from_string(required<std::string>(j, "side"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  const Eigen::Vector3d position = vec3_field(j, "position");
  if (j.contains("orientation")) {
    r.sample.pose = pose3_from_json(j);
  } else {
    const double yaw = j.contains("yaw") ? required<double>(j, "yaw") : 0.0;
    r.sample.pose = Pose3::from_xyz_yaw(position.x(), position.y(), position.z(), yaw);
  }
  if (j.contains("velocity")) {
    r.sample.linear_velocity = vec3_field(j, "velocity");
    if (!r.sample.linear_velocity.allFinite()) throw FormatError("velocity must be finite");
    r.has_velocity = true;
  }
  if (j.contains("yaw_rate")) {
    r.sample.yaw_rate = required<double>(j, "yaw_rate");
    r.has_yaw_rate = true;
  }
  if (!r.sample.pose.position.allFinite()) throw FormatError("position must be finite");
  return r;
}

json to_json(const TrackerRecord& r) {
  const auto& p = r.sample.pose.position;
  json j = {{"t", r.sample.time}, {"side", std::string(to_string(r.side))}, {"position", {p.x(), p.y(), p.z()}},
            {"yaw", r.sample.pose.yaw()}};
  if (r.has_velocity) {
    const auto& v = r.sample.linear_velocity;
    j["velocity"] = {v.x(), v.y(), v.z()};
  }
  if (r.has_yaw_rate) j["yaw_rate"] = r.sample.yaw_rate;
  return j;
}

TrackerSample TrackerStreamNormalizer::normalize(const TrackerRecord& record, std::size_t line) {
  const double t = record.sample.time;
  if (last_time_ && t < *last_time_) throw FormatError("tracker time went backwards", line);
  TrackerSample sample = record.sample;

  const auto prev = previous_.find(record.side);
  if (prev != previous_.end()) {
    const double dt = t - prev->second.time;
    if (!(dt > 0)) throw FormatError("tracker time must increase strictly for each foot", line);
    if (!record.has_velocity) sample.linear_velocity = (sample.pose.position - prev->second.pose.position) / dt;
    if (!record.has_yaw_rate) sample.yaw_rate = normalize_angle(sample.pose.yaw() - prev->second.pose.yaw()) / dt;
  } else {
    if (!record.has_velocity) sample.linear_velocity.setZero();
    if (!record.has_yaw_rate) sample.yaw_rate = 0.0;
  }
  last_time_ = t;
  previous_[record.side] = sample;
  return sample;
}

json to_json(const FootstepCommand& c) {
  return {{"side", std::string(to_string(c.side))},
          {"x", c.pose.x},
          {"y", c.pose.y},
          {"yaw", c.pose.yaw},
          {"height", c.height},
          {"step", c.step_index},
          {"user_step_start", c.user_step_start}};
}

FootstepCommand footstep_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("footstep record must be a JSON object");
  FootstepCommand c;
  try {
    c.side = foot_side_from_string(required<std::string>(j, "side"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  c.pose = Pose2(required<double>(j, "x"), required<double>(j, "y"), j.contains("yaw") ? required<double>(j, "yaw") : 0.0);
  if (j.contains("height")) c.height = required<double>(j, "height");
  if (j.contains("step")) c.step_index = required<std::uint64_t>(j, "step");
  if (j.contains("user_step_start")) c.user_step_start = required<double>(j, "user_step_start");
  return c;
}

json to_json(const CandidateResult& r) {
  return {{"x", r.pose.x},
          {"y", r.pose.y},
          {"yaw", r.pose.yaw},
          {"height", r.height},
          {"total_cost", r.total_cost},
          {"feasible", r.feasible},
          {"breakdown",
           {{"position", r.breakdown.position},
            {"yaw", r.breakdown.yaw},
            {"planarity", r.breakdown.planarity},
            {"height", r.breakdown.height}}}};
}

json to_json(const StrideEstimate& e) {
  json j = {{"stride", e.stride}, {"yaw", e.yaw}, {"landing_factor", e.landing_factor}};
  j["direction"] = e.direction ? json::array({e.direction->x(), e.direction->y()}) : json(nullptr);
  return j;
}

}  // namespace stepstream
