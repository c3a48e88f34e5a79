#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace frameshed {

inline constexpr int kHueDomain = 180;   // OpenCV-style hue, [0, 180)
inline constexpr int kSatValDomain = 256;

// Half-open hue interval [lo, hi) on the [0, 180) circle.
struct HueInterval {
  int lo = 0;
  int hi = 0;

  bool contains(int hue) const { return hue >= lo && hue < hi; }
  bool operator==(const HueInterval&) const = default;
};

// A color as a union of disjoint hue intervals, e.g. red = [0,10) u [170,180).
class HueRange {
 public:
  HueRange() = default;
  // Validates: non-empty, each interval within [0,180], pairwise disjoint.
  explicit HueRange(std::vector<HueInterval> intervals);

  bool contains(int hue) const;
  const std::vector<HueInterval>& intervals() const { return intervals_; }

  bool operator==(const HueRange&) const = default;

 private:
  std::vector<HueInterval> intervals_;  // sorted by lo
};

struct NamedColor {
  std::string name;
  HueRange range;
};

// Saturation x value binning. Bin sizes must divide 256 exactly.
class BinGrid {
 public:
  BinGrid() : BinGrid(32, 32) {}
  BinGrid(int sat_bin_size, int val_bin_size);

  int sat_bin_size() const { return sat_bin_size_; }
  int val_bin_size() const { return val_bin_size_; }
  int n_sat_bins() const { return n_sat_bins_; }
  int n_val_bins() const { return n_val_bins_; }
  int n_bins() const { return n_sat_bins_ * n_val_bins_; }

  bool operator==(const BinGrid&) const = default;

 private:
  int sat_bin_size_;
  int val_bin_size_;
  int n_sat_bins_;
  int n_val_bins_;
};

// i such that i*s <= saturation < (i+1)*s. Throws InputError out of range.
int sat_bin(int saturation, const BinGrid& grid);
// j such that j*v <= value < (j+1)*v. Throws InputError out of range.
int val_bin(int value, const BinGrid& grid);

struct HistQuant {
  int hue_step = 1;
  int sat_step = 32;
  int val_step = 32;

  bool operator==(const HistQuant&) const = default;
};

struct HistCell {
  std::int32_t h_cell = 0;
  std::int32_t s_cell = 0;
  std::int32_t v_cell = 0;
  std::int64_t count = 0;
};

// Sparse HSV histogram of a frame's foreground pixels. The quantization
// steps must divide their domains; cell counts must sum to total_fg_pixels.
class HsvHistogram {
 public:
  HsvHistogram() = default;
  HsvHistogram(HistQuant quant, std::vector<HistCell> cells,
               std::int64_t total_fg_pixels);

  // Exact histogram (quant 1/1/1) from raw pixel triplets.
  static HsvHistogram from_pixels(
      const std::vector<std::array<int, 3>>& pixels);

  const HistQuant& quant() const { return quant_; }
  const std::vector<HistCell>& cells() const { return cells_; }
  std::int64_t total_fg_pixels() const { return total_fg_pixels_; }

 private:
  HistQuant quant_;
  std::vector<HistCell> cells_;
  std::int64_t total_fg_pixels_ = 0;
};

// Dense row-major sat x val matrix of pixel fractions.
struct BinMatrix {
  int n_sat = 0;
  int n_val = 0;
  std::vector<double> values;  // n_sat * n_val, row-major

  double at(int i, int j) const { return values[i * n_val + j]; }
  double& at(int i, int j) { return values[i * n_val + j]; }
  double sum() const;
};

struct ColorFeature {
  double hue_fraction = 0.0;
  std::int64_t hue_pixel_count = 0;
  BinMatrix pf;
};

// The shedder's only view of a frame: per-color hue fraction and pixel
// fraction matrix, normalized over the color's own pixels.
struct FrameFeatures {
  std::map<std::string, ColorFeature> per_color;
  std::int64_t total_fg_pixels = 0;
};

// Fraction of foreground pixels with hue in `color`; 0 for an empty frame.
double hue_fraction(const HsvHistogram& hist, const HueRange& color);

// Features for all requested colors. Requires grid bin sizes to be integer
// multiples of the histogram's sat/val steps and hue interval bounds aligned
// to the hue step; throws ConfigError otherwise.
FrameFeatures extract_features(const HsvHistogram& hist,
                               const std::vector<NamedColor>& colors,
                               const BinGrid& grid);

}  // namespace frameshed
