#include "stepstream/config.hpp"
#include "stepstream/formats.hpp"

#include "synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace stepstream;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("stepstream_formats_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Hm1, RoundTripIsExact) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    HeightMap map(7 + trial, 3 + trial % 5, 0.01 + 0.001 * trial, {u(rng), u(rng)});
    for (double& h : map.heights()) h = u(rng) < -0.8 ? std::nan("") : u(rng) * 1e3;
    std::stringstream buf;
    write_hm1(buf, map);
    const HeightMap back = read_hm1(buf);
    ASSERT_EQ(back.width(), map.width());
    ASSERT_EQ(back.height(), map.height());
    EXPECT_EQ(back.resolution(), map.resolution());
    EXPECT_EQ(back.origin(), map.origin());
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (std::isnan(map.heights()[i])) {
        EXPECT_TRUE(std::isnan(back.heights()[i]));
      } else {
        EXPECT_EQ(back.heights()[i], map.heights()[i]);
      }
    }
  }
}

TEST(Hm1, MalformedInputs) {
  for (const char* text : {"", "HM2 1 1 0.1 0 0\n0\n", "HM1 0 1 0.1 0 0\n", "HM1 2 1 0.1 0 0\n1\n",
                           "HM1 1 1 0.1 0 0\n1 2\n", "HM1 1 1 0.1 0 0\nabc\n", "HM1 1 1 0.1 0 0\ninf\n"}) {
    std::stringstream in(text);
    EXPECT_THROW(read_hm1(in), FormatError) << text;
  }
}

TEST(DepthFrames, SaveLoadRoundTrip) {
  const auto dir = scratch_dir("depth");
  DepthFrame frame;
  frame.timestamp = 1.25;
  frame.depth = {1.0f, std::nanf(""), 2.5f, 0.125f};
  frame.camera_pose = stepstream::testing::downward_camera(0.1, 0.2, 1.3, 0.4);
  const CameraIntrinsics intr{100, 100, 0.5, 0.5, 2, 2};
  save_depth_frame(dir, "f0", frame, intr);
  const DepthFrameFile back = load_depth_frame(dir, "f0");
  EXPECT_EQ(back.stem, "f0");
  EXPECT_EQ(back.frame.timestamp, 1.25);
  ASSERT_EQ(back.frame.depth.size(), 4u);
  EXPECT_EQ(back.frame.depth[0], 1.0f);
  EXPECT_TRUE(std::isnan(back.frame.depth[1]));
  EXPECT_LT((back.frame.camera_pose.position - frame.camera_pose.position).norm(), 1e-12);
  EXPECT_LT((back.frame.camera_pose.rotation - frame.camera_pose.rotation).norm(), 1e-12);
  ASSERT_TRUE(back.intrinsics);
  EXPECT_EQ(back.intrinsics->width, 2);

  // Bytes are little-endian float32.
  std::ifstream raw(dir / "f0.bin", std::ios::binary);
  unsigned char bytes[4];
  raw.read(reinterpret_cast<char*>(bytes), 4);
  EXPECT_EQ(bytes[0], 0x00);
  EXPECT_EQ(bytes[3], 0x3f);
}

TEST(DepthFrames, MissingSidecar) {
  const auto dir = scratch_dir("nosidecar");
  write_depth_binary(dir / "a.bin", {1.0f});
  EXPECT_THROW(load_depth_frame(dir, "a"), FormatError);
}

TEST(TrackerRecords, ParseVariants) {
  const TrackerRecord a = tracker_record_from_json(json::parse(R"({"t":1.0,"side":"left","position":[1,2,3]})"));
  EXPECT_EQ(a.side, FootSide::Left);
  EXPECT_FALSE(a.has_velocity);
  const TrackerRecord b = tracker_record_from_json(
      json::parse(R"({"t":1.0,"side":"right","position":[0,0,0],"yaw":0.5,"velocity":[1,0,0],"yaw_rate":0.1})"));
  EXPECT_NEAR(b.sample.pose.yaw(), 0.5, 1e-12);
  EXPECT_TRUE(b.has_velocity);
  const double s = std::sqrt(0.5);
  const TrackerRecord c = tracker_record_from_json(
      json::parse("{\"t\":0,\"side\":\"L\",\"position\":[0,0,0],\"orientation\":[" + std::to_string(s) + ",0,0," +
                  std::to_string(s) + "]}"));
  EXPECT_NEAR(c.sample.pose.yaw(), M_PI / 2, 1e-6);
  for (const char* bad : {R"([1,2])", R"({"side":"left","position":[0,0,0]})", R"({"t":0,"side":"x","position":[0,0,0]})",
                          R"({"t":0,"side":"left","position":[0,0]})", R"({"t":"a","side":"left","position":[0,0,0]})"}) {
    EXPECT_THROW(tracker_record_from_json(json::parse(bad)), FormatError) << bad;
  }
}

TEST(TrackerNormalizer, BackwardDifferencesAndOrdering) {
  TrackerStreamNormalizer n;
  TrackerRecord r;
  r.side = FootSide::Left;
  r.sample.time = 0.0;
  r.sample.pose = Pose3::from_xyz_yaw(0, 0, 0, 0);
  EXPECT_EQ(n.normalize(r).linear_velocity, Eigen::Vector3d::Zero());
  r.sample.time = 0.5;
  r.sample.pose = Pose3::from_xyz_yaw(0.1, 0, 0.05, 0.2);
  const TrackerSample s = n.normalize(r);
  EXPECT_NEAR(s.linear_velocity.x(), 0.2, 1e-12);
  EXPECT_NEAR(s.linear_velocity.z(), 0.1, 1e-12);
  EXPECT_NEAR(s.yaw_rate, 0.4, 1e-12);

  TrackerRecord other = r;
  other.side = FootSide::Right;
  EXPECT_NO_THROW(n.normalize(other));  // same time, other foot
  EXPECT_THROW(n.normalize(r, 7), FormatError);  // same time, same foot
  r.sample.time = 0.1;
  try {
    n.normalize(r, 9);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 9u);
  }
}

TEST(Footsteps, JsonRoundTrip) {
  FootstepCommand c;
  c.side = FootSide::Right;
  c.pose = Pose2(0.3, -0.1, 0.2);
  c.height = 0.05;
  c.step_index = 4;
  c.user_step_start = 2.5;
  const FootstepCommand back = footstep_from_json(to_json(c));
  EXPECT_EQ(back.side, c.side);
  EXPECT_EQ(back.pose.x, c.pose.x);
  EXPECT_EQ(back.pose.yaw, c.pose.yaw);
  EXPECT_EQ(back.step_index, 4u);
  EXPECT_THROW(footstep_from_json(json::parse(R"({"side":"left","y":0})")), FormatError);
}

TEST(Config, DumpRoundTripsAllDefaults) {
  const PipelineConfig defaults;
  const json dumped = to_json(defaults);
  const PipelineConfig back = config_from_json(dumped);
  EXPECT_EQ(to_json(back), dumped);
  EXPECT_EQ(dumped.at("weights").at("position"), 10.0);
  EXPECT_EQ(dumped.at("fusion").at("alpha"), 0.7);
  EXPECT_EQ(dumped.at("timing").at("transfer_min"), 0.15);
}

TEST(Config, PartialOverlay) {
  const PipelineConfig c = config_from_json(json::parse(R"({"swing":{"swing_height":0.2},"seed":5})"));
  EXPECT_EQ(c.swing.swing_height, 0.2);
  EXPECT_EQ(c.swing.duration, 0.65);
  EXPECT_EQ(c.seed, 5u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config_from_json(json::parse(R"({"bogus":1})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"weights":{"positoin":1}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"weights":{"position":"ten"}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"timing":{"transfer_min":2.0}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"([1,2])")), ConfigError);
}
