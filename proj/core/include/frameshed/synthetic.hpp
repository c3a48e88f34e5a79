#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "frameshed/color_features.hpp"
#include "frameshed/sim.hpp"

namespace frameshed {

// red = [0,10) u [170,180); yellow = [20,35).
std::vector<NamedColor> default_colors();

// Multi-camera corpus with object tracks whose frames carry a heavy mass of
// bright (high-saturation) target-hue pixels, while object-free frames carry
// at most a trace of it plus dull low-saturation target-hue pixels. Utilities
// of positives and negatives are well separated under a trained model.
struct SeparableCorpusSpec {
  int cameras = 10;
  int frames_per_camera = 900;
  double fps = 10.0;
  std::string color = "red";
  int track_len_min = 10;
  int track_len_max = 30;
  int gap_len_min = 40;
  int gap_len_max = 80;
  double positive_bright_min = 0.20;  // bright target-hue pixel mass
  double positive_bright_max = 0.35;
  double negative_bright_max = 0.01;
};

std::vector<FrameRecord> generate_separable_corpus(const SeparableCorpusSpec& spec,
                                                   std::uint64_t seed);

// Single-camera scenario with three equal-length segments:
//   1. object-free, low-utility frames that the backend's color filter drops,
//   2. object tracks with bright target color: every frame reaches the DNN,
//   3. object-free frames with bright target color (high utility) that the
//      backend's color filter nevertheless drops.
struct ThreeSegmentSpec {
  std::array<double, 3> segment_seconds{300.0, 300.0, 300.0};
  double fps = 10.0;
  std::string color = "red";
  std::int32_t camera_id = 0;
  int track_len_min = 10;
  int track_len_max = 30;
};

std::vector<FrameRecord> generate_three_segment_scenario(
    const ThreeSegmentSpec& spec, std::uint64_t seed);

}  // namespace frameshed
