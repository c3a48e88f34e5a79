#include <cstdio>

#include "commands.hpp"
#include "frameshed/io.hpp"
#include "frameshed/synthetic.hpp"
#include "util.hpp"

namespace frameshed::cli {

int cmd_synth(const SynthArgs& args) {
  std::vector<FrameRecord> frames;
  if (args.scenario == "separable") {
    SeparableCorpusSpec spec;
    spec.cameras = args.cameras;
    spec.frames_per_camera = args.frames_per_camera;
    spec.fps = args.fps;
    spec.color = args.color;
    frames = generate_separable_corpus(spec, args.seed);
  } else if (args.scenario == "three-segment") {
    ThreeSegmentSpec spec;
    const auto minutes = parse_double_list(args.segment_minutes);
    if (minutes.size() != 3) {
      throw InputError("--segment-minutes needs three comma-separated values");
    }
    for (int i = 0; i < 3; ++i) {
      spec.segment_seconds[static_cast<std::size_t>(i)] =
          minutes[static_cast<std::size_t>(i)] * 60.0;
    }
    spec.fps = args.fps;
    spec.color = args.color;
    frames = generate_three_segment_scenario(spec, args.seed);
  } else {
    throw InputError("unknown scenario '" + args.scenario +
                     "' (use separable or three-segment)");
  }

  save_dataset_jsonl(args.out_path, frames);
  if (!args.colors_out.empty()) {
    save_colors_config(args.colors_out, default_colors());
  }
  std::printf("wrote %zu frames to %s\n", frames.size(), args.out_path.c_str());
  return 0;
}

}  // namespace frameshed::cli
