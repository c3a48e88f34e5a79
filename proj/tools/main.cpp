#include <cstdio>
#include <exception>

#include "CLI11.hpp"

#include "commands.hpp"
#include "frameshed/errors.hpp"

namespace {

// Exit codes: 0 success, 1 runtime failure, 2 input/config error.
constexpr int kRuntimeError = 1;
constexpr int kInputError = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frameshed: utility-aware load shedding for frame streams"};
  app.require_subcommand(1);

  frameshed::cli::TrainArgs train;
  auto* train_cmd =
      app.add_subcommand("train", "Train a utility model from a labeled dataset");
  train_cmd->add_option("--dataset", train.datasets, "Frame-feature JSONL file")
      ->required();
  train_cmd->add_option("--colors", train.colors_path, "Colors config JSON")
      ->required();
  train_cmd->add_option("--query", train.query,
                        "Color query, e.g. 'red' or 'red|yellow'");
  train_cmd->add_option("--grid", train.grid, "Saturation x value bin sizes");
  train_cmd->add_option("--out", train.out_path, "Output model file")->required();

  frameshed::cli::SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--scenario", synth.scenario,
                        "separable | three-segment");
  synth_cmd->add_option("--seed", synth.seed, "RNG seed");
  synth_cmd->add_option("--out", synth.out_path, "Output JSONL file")->required();
  synth_cmd->add_option("--colors-out", synth.colors_out,
                        "Also write the default colors config here");
  synth_cmd->add_option("--cameras", synth.cameras, "Cameras (separable)");
  synth_cmd->add_option("--frames-per-camera", synth.frames_per_camera,
                        "Frames per camera (separable)");
  synth_cmd->add_option("--fps", synth.fps, "Frame rate per camera");
  synth_cmd->add_option("--color", synth.color, "Target color name");
  synth_cmd->add_option("--segment-minutes", synth.segment_minutes,
                        "Three segment lengths, e.g. 5,5,5");

  frameshed::cli::RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Simulate the shedding pipeline");
  run_cmd->add_option("--model", run.model_path, "Model file");
  run_cmd->add_option("--dataset", run.datasets, "Dataset JSONL (repeatable)")
      ->required();
  run_cmd->add_option("--config", run.config_path, "Simulation config JSON");
  run_cmd->add_option("--out", run.out_dir, "Output directory")->required();
  run_cmd->add_option("--seed", run.seed, "RNG seed");
  run_cmd->add_option("--baseline", run.baseline, "utility | random");
  run_cmd->add_option("--rate", run.rate, "Drop rate for the random baseline");
  run_cmd->add_option("--lb-ms", run.lb_ms, "End-to-end latency bound");
  run_cmd->add_flag("--no-seed-history", run.no_seed_history,
                    "Do not seed the utility history from the model");

  frameshed::cli::SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Offline threshold sweep or leave-one-camera-out validation");
  sweep_cmd->add_option("--model", sweep.model_path, "Model file");
  sweep_cmd->add_option("--dataset", sweep.datasets, "Dataset JSONL (repeatable)")
      ->required();
  sweep_cmd->add_option("--out", sweep.out_path, "Output CSV")->required();
  sweep_cmd->add_option("--thresholds", sweep.thresholds,
                        "Comma-separated utility thresholds");
  sweep_cmd->add_option("--steps", sweep.steps,
                        "Number of uniform threshold steps when no list given");
  sweep_cmd->add_option("--rates", sweep.rates,
                        "Comma-separated target drop rates (CDF inverse)");
  sweep_cmd->add_flag("--cross-validate", sweep.cross_validate,
                      "Leave-one-camera-out utility separation study");
  sweep_cmd->add_option("--colors", sweep.colors_path,
                        "Colors config (cross-validation retrains)");
  sweep_cmd->add_option("--query", sweep.query, "Color query");
  sweep_cmd->add_option("--grid", sweep.grid, "Bin sizes, e.g. 32x32");

  frameshed::cli::ReportArgs report;
  auto* report_cmd =
      app.add_subcommand("report", "Aggregate tradeoff tables from run dirs");
  report_cmd->add_option("--run", report.run_dirs, "Run directory (repeatable)")
      ->required();
  report_cmd->add_option("--out", report.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*train_cmd) return frameshed::cli::cmd_train(train);
    if (*synth_cmd) return frameshed::cli::cmd_synth(synth);
    if (*run_cmd) return frameshed::cli::cmd_run(run);
    if (*sweep_cmd) return frameshed::cli::cmd_sweep(sweep);
    if (*report_cmd) return frameshed::cli::cmd_report(report);
  } catch (const frameshed::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  } catch (const frameshed::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  } catch (const frameshed::TrainingError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
  return kRuntimeError;
}
