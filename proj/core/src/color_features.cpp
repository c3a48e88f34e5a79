#include "frameshed/color_features.hpp"

#include <algorithm>
#include <numeric>

#include "frameshed/errors.hpp"

namespace frameshed {

HueRange::HueRange(std::vector<HueInterval> intervals)
    : intervals_(std::move(intervals)) {
  if (intervals_.empty()) {
    throw ConfigError("hue range needs at least one interval");
  }
  std::sort(intervals_.begin(), intervals_.end(),
            [](const HueInterval& a, const HueInterval& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const auto& iv = intervals_[i];
    if (iv.lo < 0 || iv.hi > kHueDomain || iv.lo >= iv.hi) {
      throw ConfigError("hue interval [" + std::to_string(iv.lo) + "," +
                        std::to_string(iv.hi) + ") outside [0,180)");
    }
    if (i > 0 && intervals_[i - 1].hi > iv.lo) {
      throw ConfigError("hue intervals overlap");
    }
  }
}

bool HueRange::contains(int hue) const {
  for (const auto& iv : intervals_) {
    if (iv.contains(hue)) return true;
  }
  return false;
}

BinGrid::BinGrid(int sat_bin_size, int val_bin_size)
    : sat_bin_size_(sat_bin_size), val_bin_size_(val_bin_size) {
  if (sat_bin_size_ <= 0 || kSatValDomain % sat_bin_size_ != 0) {
    throw ConfigError("saturation bin size must divide 256");
  }
  if (val_bin_size_ <= 0 || kSatValDomain % val_bin_size_ != 0) {
    throw ConfigError("value bin size must divide 256");
  }
  n_sat_bins_ = kSatValDomain / sat_bin_size_;
  n_val_bins_ = kSatValDomain / val_bin_size_;
}

int sat_bin(int saturation, const BinGrid& grid) {
  if (saturation < 0 || saturation >= kSatValDomain) {
    throw InputError("saturation " + std::to_string(saturation) +
                     " outside [0,256)");
  }
  return saturation / grid.sat_bin_size();
}

int val_bin(int value, const BinGrid& grid) {
  if (value < 0 || value >= kSatValDomain) {
    throw InputError("value " + std::to_string(value) + " outside [0,256)");
  }
  return value / grid.val_bin_size();
}

HsvHistogram::HsvHistogram(HistQuant quant, std::vector<HistCell> cells,
                           std::int64_t total_fg_pixels)
    : quant_(quant), cells_(std::move(cells)), total_fg_pixels_(total_fg_pixels) {
  if (quant_.hue_step <= 0 || kHueDomain % quant_.hue_step != 0) {
    throw InputError("histogram hue step must divide 180");
  }
  if (quant_.sat_step <= 0 || kSatValDomain % quant_.sat_step != 0 ||
      quant_.val_step <= 0 || kSatValDomain % quant_.val_step != 0) {
    throw InputError("histogram sat/val steps must divide 256");
  }
  const int n_h = kHueDomain / quant_.hue_step;
  const int n_s = kSatValDomain / quant_.sat_step;
  const int n_v = kSatValDomain / quant_.val_step;
  std::int64_t sum = 0;
  for (const auto& c : cells_) {
    if (c.h_cell < 0 || c.h_cell >= n_h || c.s_cell < 0 || c.s_cell >= n_s ||
        c.v_cell < 0 || c.v_cell >= n_v) {
      throw InputError("histogram cell index out of range");
    }
    if (c.count < 0) throw InputError("negative histogram cell count");
    sum += c.count;
  }
  if (sum != total_fg_pixels_) {
    throw InputError("histogram cell counts sum to " + std::to_string(sum) +
                     ", expected total " + std::to_string(total_fg_pixels_));
  }
}

HsvHistogram HsvHistogram::from_pixels(
    const std::vector<std::array<int, 3>>& pixels) {
  std::map<std::array<int, 3>, std::int64_t> acc;
  for (const auto& p : pixels) ++acc[p];
  std::vector<HistCell> cells;
  cells.reserve(acc.size());
  for (const auto& [key, count] : acc) {
    cells.push_back({key[0], key[1], key[2], count});
  }
  return HsvHistogram(HistQuant{1, 1, 1}, std::move(cells),
                      static_cast<std::int64_t>(pixels.size()));
}

double BinMatrix::sum() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

namespace {

// Precomputed membership of each hue cell in the color's range. Requires
// interval bounds aligned to whole cells so membership is exact.
std::vector<char> hue_cell_mask(const HueRange& color, int hue_step) {
  for (const auto& iv : color.intervals()) {
    if (iv.lo % hue_step != 0 || iv.hi % hue_step != 0) {
      throw ConfigError("hue interval [" + std::to_string(iv.lo) + "," +
                        std::to_string(iv.hi) +
                        ") not aligned to histogram hue step " +
                        std::to_string(hue_step));
    }
  }
  const int n_cells = kHueDomain / hue_step;
  std::vector<char> mask(n_cells, 0);
  for (int c = 0; c < n_cells; ++c) {
    mask[c] = color.contains(c * hue_step) ? 1 : 0;
  }
  return mask;
}

}  // namespace

double hue_fraction(const HsvHistogram& hist, const HueRange& color) {
  if (hist.total_fg_pixels() == 0) return 0.0;
  const auto mask = hue_cell_mask(color, hist.quant().hue_step);
  std::int64_t in_range = 0;
  for (const auto& c : hist.cells()) {
    if (mask[c.h_cell]) in_range += c.count;
  }
  return static_cast<double>(in_range) /
         static_cast<double>(hist.total_fg_pixels());
}

FrameFeatures extract_features(const HsvHistogram& hist,
                               const std::vector<NamedColor>& colors,
                               const BinGrid& grid) {
  const auto& q = hist.quant();
  if (grid.sat_bin_size() % q.sat_step != 0 ||
      grid.val_bin_size() % q.val_step != 0) {
    throw ConfigError(
        "bin grid (" + std::to_string(grid.sat_bin_size()) + "," +
        std::to_string(grid.val_bin_size()) +
        ") is finer than histogram quantization (" + std::to_string(q.sat_step) +
        "," + std::to_string(q.val_step) + ")");
  }
  const int sat_cells_per_bin = grid.sat_bin_size() / q.sat_step;
  const int val_cells_per_bin = grid.val_bin_size() / q.val_step;

  FrameFeatures out;
  out.total_fg_pixels = hist.total_fg_pixels();

  for (const auto& color : colors) {
    const auto mask = hue_cell_mask(color.range, q.hue_step);
    ColorFeature feat;
    feat.pf.n_sat = grid.n_sat_bins();
    feat.pf.n_val = grid.n_val_bins();
    feat.pf.values.assign(static_cast<std::size_t>(grid.n_bins()), 0.0);

    std::vector<std::int64_t> bin_counts(static_cast<std::size_t>(grid.n_bins()), 0);
    std::int64_t color_pixels = 0;
    for (const auto& c : hist.cells()) {
      if (!mask[c.h_cell]) continue;
      color_pixels += c.count;
      const int i = c.s_cell / sat_cells_per_bin;
      const int j = c.v_cell / val_cells_per_bin;
      bin_counts[static_cast<std::size_t>(i * grid.n_val_bins() + j)] += c.count;
    }

    feat.hue_pixel_count = color_pixels;
    if (hist.total_fg_pixels() > 0) {
      feat.hue_fraction = static_cast<double>(color_pixels) /
                          static_cast<double>(hist.total_fg_pixels());
    }
    if (color_pixels > 0) {
      for (std::size_t k = 0; k < bin_counts.size(); ++k) {
        feat.pf.values[k] = static_cast<double>(bin_counts[k]) /
                            static_cast<double>(color_pixels);
      }
    }
    out.per_color.emplace(color.name, std::move(feat));
  }
  return out;
}

}  // namespace frameshed
