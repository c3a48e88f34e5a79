#include "frameshed/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "frameshed/errors.hpp"
#include "frameshed/rng.hpp"

namespace frameshed {

std::vector<NamedColor> default_colors() {
  return {
      {"red", HueRange({{0, 10}, {170, 180}})},
      {"yellow", HueRange({{20, 35}})},
  };
}

namespace {

constexpr HistQuant kQuant{1, 32, 32};  // 8x8 sat/val cells at hue step 1

struct CellAccum {
  std::map<std::array<int, 3>, std::int64_t> counts;

  void add(int h, int s_cell, int v_cell, std::int64_t n) {
    if (n > 0) counts[{h, s_cell, v_cell}] += n;
  }

  HsvHistogram finish(std::int64_t total) && {
    std::vector<HistCell> cells;
    cells.reserve(counts.size());
    for (const auto& [key, count] : counts) {
      cells.push_back({key[0], key[1], key[2], count});
    }
    return HsvHistogram(kQuant, std::move(cells), total);
  }
};

int pick_hue_in(const HueRange& range, Rng& rng) {
  const auto& ivs = range.intervals();
  const auto& iv = ivs[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(ivs.size()) - 1))];
  return static_cast<int>(rng.uniform_int(iv.lo, iv.hi - 1));
}

// Spreads `count` pixels of the color across n_slots random (hue, sat, val)
// cells from the given cell ranges.
void spread(CellAccum& acc, Rng& rng, const HueRange& hue, std::int64_t count,
            int sat_lo, int sat_hi, int val_lo, int val_hi, int n_slots) {
  if (count <= 0) return;
  std::int64_t left = count;
  for (int k = 0; k < n_slots && left > 0; ++k) {
    const std::int64_t part =
        (k == n_slots - 1) ? left : rng.uniform_int(0, left);
    acc.add(pick_hue_in(hue, rng),
            static_cast<int>(rng.uniform_int(sat_lo, sat_hi)),
            static_cast<int>(rng.uniform_int(val_lo, val_hi)),
            part);
    left -= part;
  }
  if (left > 0) {
    acc.add(pick_hue_in(hue, rng), sat_hi, val_hi, left);
  }
}

const HueRange& background_hues() {
  static const HueRange range({{45, 160}});
  return range;
}

// bright: high-saturation, bright-value target-hue pixels (sat cells 6-7,
// val cells 4-7). dull: low-saturation target-hue pixels (sat cells 0-2).
HsvHistogram make_hist(Rng& rng, const HueRange& target, double bright_frac,
                       double dull_frac) {
  const std::int64_t total = rng.uniform_int(8000, 16000);
  const auto bright = static_cast<std::int64_t>(
      std::llround(static_cast<double>(total) * bright_frac));
  const auto dull = static_cast<std::int64_t>(
      std::llround(static_cast<double>(total) * dull_frac));
  CellAccum acc;
  spread(acc, rng, target, bright, 6, 7, 4, 7, 4);
  spread(acc, rng, target, dull, 0, 2, 0, 7, 3);
  spread(acc, rng, background_hues(), total - bright - dull, 0, 7, 0, 7, 6);
  return std::move(acc).finish(total);
}

HsvHistogram positive_hist(Rng& rng, const HueRange& target,
                           const SeparableCorpusSpec& spec) {
  return make_hist(rng, target,
                   rng.uniform(spec.positive_bright_min, spec.positive_bright_max),
                   rng.uniform(0.0, 0.02));
}

HsvHistogram negative_hist(Rng& rng, const HueRange& target,
                           const SeparableCorpusSpec& spec) {
  // Half the negatives carry no bright target-hue pixels at all; the rest
  // carry a trace. All carry a dull low-saturation share so the trace stays
  // a small fraction of the color's own pixels.
  const double bright =
      rng.bernoulli(0.5) ? 0.0 : rng.uniform(0.0, spec.negative_bright_max);
  return make_hist(rng, target, bright, rng.uniform(0.04, 0.12));
}

HueRange find_color(const std::string& name) {
  for (const auto& c : default_colors()) {
    if (c.name == name) return c.range;
  }
  throw ConfigError("unknown synthetic color '" + name + "'");
}

}  // namespace

std::vector<FrameRecord> generate_separable_corpus(const SeparableCorpusSpec& spec,
                                                   std::uint64_t seed) {
  if (spec.cameras < 1 || spec.frames_per_camera < 1) {
    throw ConfigError("corpus needs at least one camera and one frame");
  }
  const HueRange target = find_color(spec.color);
  Rng root(seed);
  std::vector<FrameRecord> out;
  out.reserve(static_cast<std::size_t>(spec.cameras) *
              static_cast<std::size_t>(spec.frames_per_camera));
  const auto frame_period_ms =
      static_cast<std::int64_t>(std::llround(1000.0 / spec.fps));
  std::int64_t next_object_id = 1;
  std::int64_t next_frame_id = 0;

  for (int cam = 0; cam < spec.cameras; ++cam) {
    Rng rng = root.fork(static_cast<std::uint64_t>(cam) + 1);
    int frame_in_cam = 0;
    // Start each camera at a random point of its idle period so tracks are
    // not phase-aligned across cameras.
    int idle_left = static_cast<int>(
        rng.uniform_int(spec.gap_len_min / 2, spec.gap_len_max));
    int track_left = 0;
    std::int64_t object_id = 0;

    while (frame_in_cam < spec.frames_per_camera) {
      FrameRecord fr;
      fr.frame_id = next_frame_id++;
      fr.camera_id = cam;
      fr.generation_ts_ms = static_cast<std::int64_t>(frame_in_cam) * frame_period_ms;
      if (track_left > 0) {
        fr.hist = positive_hist(rng, target, spec);
        fr.objects.push_back({object_id, spec.color});
        fr.stage_flags = {true, true};
        --track_left;
        if (track_left == 0) {
          idle_left = static_cast<int>(
              rng.uniform_int(spec.gap_len_min, spec.gap_len_max));
        }
      } else {
        fr.hist = negative_hist(rng, target, spec);
        fr.stage_flags = {false, false};
        --idle_left;
        if (idle_left <= 0) {
          track_left = static_cast<int>(
              rng.uniform_int(spec.track_len_min, spec.track_len_max));
          object_id = next_object_id++;
        }
      }
      ++frame_in_cam;
      out.push_back(std::move(fr));
    }
  }
  // Emit the interleaved multi-camera stream.
  std::stable_sort(out.begin(), out.end(),
                   [](const FrameRecord& a, const FrameRecord& b) {
                     if (a.generation_ts_ms != b.generation_ts_ms) {
                       return a.generation_ts_ms < b.generation_ts_ms;
                     }
                     return a.camera_id < b.camera_id;
                   });
  return out;
}

std::vector<FrameRecord> generate_three_segment_scenario(
    const ThreeSegmentSpec& spec, std::uint64_t seed) {
  for (double s : spec.segment_seconds) {
    if (s <= 0.0) throw ConfigError("segment lengths must be positive");
  }
  const HueRange target = find_color(spec.color);
  Rng rng(seed);
  SeparableCorpusSpec mass;  // reuse the bright/dull mass parameters
  mass.color = spec.color;

  const auto frame_period_ms =
      static_cast<std::int64_t>(std::llround(1000.0 / spec.fps));
  std::array<std::int64_t, 3> seg_frames{};
  for (int s = 0; s < 3; ++s) {
    seg_frames[static_cast<std::size_t>(s)] = static_cast<std::int64_t>(
        std::llround(spec.segment_seconds[static_cast<std::size_t>(s)] * spec.fps));
  }

  std::vector<FrameRecord> out;
  out.reserve(static_cast<std::size_t>(seg_frames[0] + seg_frames[1] + seg_frames[2]));
  std::int64_t frame_id = 0;
  std::int64_t next_object_id = 1;
  std::int64_t track_left = 0;
  std::int64_t object_id = 0;

  for (int seg = 0; seg < 3; ++seg) {
    for (std::int64_t k = 0; k < seg_frames[static_cast<std::size_t>(seg)]; ++k) {
      FrameRecord fr;
      fr.frame_id = frame_id;
      fr.camera_id = spec.camera_id;
      fr.generation_ts_ms = frame_id * frame_period_ms;
      ++frame_id;
      switch (seg) {
        case 0:
          fr.hist = negative_hist(rng, target, mass);
          fr.stage_flags = {true, false};  // cheap: dropped by color filter
          break;
        case 1: {
          // Back-to-back object tracks: every frame carries a target object
          // and traverses the full pipeline including the DNN stage.
          if (track_left == 0) {
            track_left = rng.uniform_int(spec.track_len_min, spec.track_len_max);
            object_id = next_object_id++;
          }
          fr.hist = positive_hist(rng, target, mass);
          fr.objects.push_back({object_id, spec.color});
          fr.stage_flags = {true, true};
          --track_left;
          break;
        }
        case 2:
          // Bright target color without target objects: high utility at the
          // shedder, but the backend's color filter still drops the frame.
          fr.hist = positive_hist(rng, target, mass);
          fr.stage_flags = {true, false};
          break;
      }
      out.push_back(std::move(fr));
    }
    track_left = 0;
  }
  return out;
}

}  // namespace frameshed
