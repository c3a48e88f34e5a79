#pragma once

#include <optional>
#include <string>
#include <vector>

namespace frameshed::cli {

struct TrainArgs {
  std::vector<std::string> datasets;
  std::string colors_path;
  std::string query = "red";
  std::string grid = "32x32";
  std::string out_path;
};

struct SynthArgs {
  std::string scenario = "separable";  // separable | three-segment
  std::uint64_t seed = 1;
  std::string out_path;
  std::string colors_out;
  int cameras = 10;
  int frames_per_camera = 900;
  double fps = 10.0;
  std::string color = "red";
  std::string segment_minutes = "5,5,5";
};

struct RunArgs {
  std::string model_path;
  std::vector<std::string> datasets;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 1;
  std::string baseline = "utility";  // utility | random
  double rate = 0.0;
  std::optional<double> lb_ms;
  bool no_seed_history = false;
};

struct SweepArgs {
  std::string model_path;
  std::vector<std::string> datasets;
  std::string out_path;
  std::string thresholds;  // comma list; empty -> derived from --steps
  int steps = 20;
  std::string rates;  // comma list of target drop rates
  bool cross_validate = false;
  std::string colors_path;  // required with --cross-validate
  std::string query = "red";
  std::string grid = "32x32";
};

struct ReportArgs {
  std::vector<std::string> run_dirs;
  std::string out_dir;
};

int cmd_train(const TrainArgs& args);
int cmd_synth(const SynthArgs& args);
int cmd_run(const RunArgs& args);
int cmd_sweep(const SweepArgs& args);
int cmd_report(const ReportArgs& args);

}  // namespace frameshed::cli
