// stepstream command-line entry point.

#include "stepstream/pipeline.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

constexpr const char* kVersion = "stepstream 0.1.0";

Eigen::Vector3d parse_point(const std::vector<double>& v) { return {v.at(0), v.at(1), v.at(2)}; }

}  // namespace

int main(int argc, char** argv) {
  using namespace stepstream;

  CLI::App app{"Teleoperation footstep streaming: retargeting, terrain adaptation and swing timing"};
  app.require_subcommand(0, 1);

  std::string config_path;
  bool dump_config = false;
  app.add_option("--config", config_path, "JSON configuration document")->check(CLI::ExistingFile);
  app.add_flag("--dump-config", dump_config, "Print the effective configuration with all defaults and exit");
  app.set_version_flag("--version", kVersion);

  auto* retarget = app.add_subcommand("retarget", "Tracker stream -> footstep command stream");
  std::string retarget_in, retarget_out;
  retarget->add_option("--input", retarget_in, "Line-delimited JSON tracker stream ('-' for stdin)")->required();
  retarget->add_option("--output", retarget_out, "Output JSON lines ('-' for stdout)")->required();

  auto* heightmap = app.add_subcommand("heightmap", "Depth frames -> fused HM1 height map");
  HeightmapJob hm_job;
  std::string hm_dir, hm_intr, hm_poses, hm_out;
  heightmap->add_option("--depth-dir", hm_dir, "Directory of <stem>.bin + <stem>.json frames")->required();
  heightmap->add_option("--intrinsics", hm_intr, "Intrinsics JSON for frames whose sidecar has none");
  heightmap->add_option("--poses", hm_poses, "JSON object mapping frame stems to camera poses");
  heightmap->add_option("--output", hm_out, "Output HM1 file")->required();

  auto* adjust = app.add_subcommand("adjust", "Terrain-adapt footsteps over an HM1 map");
  AdjustJob adjust_job;
  std::string adj_map, adj_steps, adj_out;
  adjust->add_option("--map", adj_map, "HM1 height map")->required();
  adjust->add_option("--footsteps", adj_steps, "Line-delimited JSON footsteps")->required();
  adjust->add_option("--output", adj_out, "Output JSON lines")->required();
  adjust->add_flag("--bench", adjust_job.bench, "Report candidates evaluated and wall time on stdout");

  auto* sim = app.add_subcommand("simulate", "Scenario -> synchronization log CSV");
  std::string sim_in, sim_out;
  sim->add_option("--scenario", sim_in, "Scenario JSON")->required();
  sim->add_option("--out", sim_out, "Output CSV log")->required();

  auto* swing = app.add_subcommand("swing", "Sample a swing trajectory to CSV");
  std::vector<double> swing_from, swing_to;
  SwingJob swing_job;
  std::string swing_out;
  std::optional<double> swing_height, swing_duration;
  swing->add_option("--from", swing_from, "Initial foot position x y z")->expected(3)->required();
  swing->add_option("--to", swing_to, "Goal foot position x y z")->expected(3)->required();
  swing->add_option("--from-yaw", swing_job.from_yaw, "Initial foot yaw");
  swing->add_option("--to-yaw", swing_job.to_yaw, "Goal foot yaw");
  swing->add_option("--swing-height", swing_height, "Override swing.swing_height");
  swing->add_option("--duration", swing_duration, "Override swing.duration");
  swing->add_option("--output", swing_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidInput;
  }

  try {
    PipelineConfig config;
    try {
      if (!config_path.empty()) config = load_config(config_path);
    } catch (const ConfigError& e) {
      report_error(std::cerr, "invalid_config", e.what());
      return kExitInvalidInput;
    }

    if (dump_config) {
      std::cout << to_json(config).dump(2) << '\n';
      return kExitOk;
    }

    if (*retarget) {
      std::ifstream in_file;
      std::ofstream out_file;
      if (retarget_in != "-") {
        in_file.open(retarget_in);
        if (!in_file) {
          report_error(std::cerr, "invalid_input", "cannot open '" + retarget_in + "'");
          return kExitInvalidInput;
        }
      }
      if (retarget_out != "-") {
        out_file.open(retarget_out);
        if (!out_file) {
          report_error(std::cerr, "invalid_input", "cannot write '" + retarget_out + "'");
          return kExitInvalidInput;
        }
      }
      std::istream& in = retarget_in == "-" ? std::cin : in_file;
      std::ostream& out = retarget_out == "-" ? std::cout : out_file;
      return run_retarget(in, out, std::cerr, config);
    }
    if (*heightmap) {
      hm_job.depth_dir = hm_dir;
      if (!hm_intr.empty()) hm_job.intrinsics = hm_intr;
      if (!hm_poses.empty()) hm_job.poses = hm_poses;
      hm_job.output = hm_out;
      return run_heightmap(hm_job, std::cerr, config);
    }
    if (*adjust) {
      adjust_job.map = adj_map;
      adjust_job.footsteps = adj_steps;
      adjust_job.output = adj_out;
      return run_adjust(adjust_job, std::cout, std::cerr, config);
    }
    if (*sim) return run_simulate({sim_in, sim_out}, std::cout, std::cerr, config);
    if (*swing) {
      swing_job.from = parse_point(swing_from);
      swing_job.to = parse_point(swing_to);
      swing_job.output = swing_out;
      if (swing_height) config.swing.swing_height = *swing_height;
      if (swing_duration) config.swing.duration = *swing_duration;
      return run_swing(swing_job, std::cerr, config);
    }
    std::cout << app.help();
    return kExitOk;
  } catch (const std::exception& e) {
    report_error(std::cerr, "internal", e.what());
    return kExitInternal;
  }
}
