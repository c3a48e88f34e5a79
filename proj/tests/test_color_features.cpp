#include "frameshed/color_features.hpp"

#include <array>
#include <map>

#include "doctest.h"
#include "frameshed/errors.hpp"
#include "frameshed/rng.hpp"

using namespace frameshed;

namespace {

const HueRange kRed({{0, 10}, {170, 180}});
const HueRange kBlue({{100, 130}});

using Pixel = std::array<int, 3>;  // (h, s, v)

// Straight-from-definition feature computation over raw pixels. Bins are
// found by scanning the predicate rather than dividing, so this stays an
// independent check on extract_features.
FrameFeatures reference_features(const std::vector<Pixel>& pixels,
                                 const std::vector<NamedColor>& colors,
                                 const BinGrid& grid) {
  FrameFeatures out;
  out.total_fg_pixels = static_cast<std::int64_t>(pixels.size());
  for (const auto& color : colors) {
    ColorFeature feat;
    feat.pf.n_sat = grid.n_sat_bins();
    feat.pf.n_val = grid.n_val_bins();
    feat.pf.values.assign(static_cast<std::size_t>(grid.n_bins()), 0.0);
    std::int64_t color_count = 0;
    std::vector<std::int64_t> bins(static_cast<std::size_t>(grid.n_bins()), 0);
    for (const auto& p : pixels) {
      if (!color.range.contains(p[0])) continue;
      ++color_count;
      int i = -1, j = -1;
      for (int k = 0; k < grid.n_sat_bins(); ++k) {
        if (k * grid.sat_bin_size() <= p[1] && p[1] < (k + 1) * grid.sat_bin_size()) i = k;
      }
      for (int k = 0; k < grid.n_val_bins(); ++k) {
        if (k * grid.val_bin_size() <= p[2] && p[2] < (k + 1) * grid.val_bin_size()) j = k;
      }
      REQUIRE(i >= 0);
      REQUIRE(j >= 0);
      ++bins[static_cast<std::size_t>(i * grid.n_val_bins() + j)];
    }
    feat.hue_pixel_count = color_count;
    if (!pixels.empty()) {
      feat.hue_fraction =
          static_cast<double>(color_count) / static_cast<double>(pixels.size());
    }
    if (color_count > 0) {
      for (std::size_t k = 0; k < bins.size(); ++k) {
        feat.pf.values[k] =
            static_cast<double>(bins[k]) / static_cast<double>(color_count);
      }
    }
    out.per_color.emplace(color.name, std::move(feat));
  }
  return out;
}

std::vector<Pixel> random_pixels(Rng& rng, int n) {
  std::vector<Pixel> pixels;
  pixels.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    pixels.push_back({static_cast<int>(rng.uniform_int(0, 179)),
                      static_cast<int>(rng.uniform_int(0, 255)),
                      static_cast<int>(rng.uniform_int(0, 255))});
  }
  return pixels;
}

// Re-bucket exact pixels into a coarser histogram.
HsvHistogram quantize(const std::vector<Pixel>& pixels, HistQuant quant) {
  std::map<std::array<int, 3>, std::int64_t> acc;
  for (const auto& p : pixels) {
    ++acc[{p[0] / quant.hue_step, p[1] / quant.sat_step, p[2] / quant.val_step}];
  }
  std::vector<HistCell> cells;
  for (const auto& [key, count] : acc) {
    cells.push_back({key[0], key[1], key[2], count});
  }
  return HsvHistogram(quant, std::move(cells),
                      static_cast<std::int64_t>(pixels.size()));
}

}  // namespace

TEST_CASE("sat_bin and val_bin map boundaries to the right bins") {
  BinGrid grid(32, 32);
  CHECK(sat_bin(0, grid) == 0);
  CHECK(sat_bin(255, grid) == 7);
  CHECK(sat_bin(64, grid) == 2);
  CHECK(val_bin(0, grid) == 0);
  CHECK(val_bin(31, grid) == 0);
  CHECK(val_bin(200, grid) == 6);
  CHECK_THROWS_AS(sat_bin(-1, grid), InputError);
  CHECK_THROWS_AS(sat_bin(256, grid), InputError);
  CHECK_THROWS_AS(val_bin(300, grid), InputError);
}

TEST_CASE("every saturation falls in exactly one bin") {
  for (int size : {16, 32, 64, 128}) {
    BinGrid grid(size, size);
    for (int s = 0; s < 256; ++s) {
      int matches = 0;
      for (int i = 0; i < grid.n_sat_bins(); ++i) {
        if (i * size <= s && s < (i + 1) * size) ++matches;
      }
      CHECK(matches == 1);
      const int i = sat_bin(s, grid);
      CHECK(i * size <= s);
      CHECK(s < (i + 1) * size);
    }
  }
}

TEST_CASE("bin grid rejects sizes that do not divide 256") {
  CHECK_THROWS_AS(BinGrid(33, 32), ConfigError);
  CHECK_THROWS_AS(BinGrid(32, 0), ConfigError);
  CHECK_NOTHROW(BinGrid(256, 1));
}

TEST_CASE("hue range validation") {
  CHECK_THROWS_AS(HueRange(std::vector<HueInterval>{}), ConfigError);
  CHECK_THROWS_AS(HueRange({{5, 5}}), ConfigError);
  CHECK_THROWS_AS(HueRange({{-1, 5}}), ConfigError);
  CHECK_THROWS_AS(HueRange({{170, 181}}), ConfigError);
  CHECK_THROWS_AS(HueRange({{0, 10}, {5, 20}}), ConfigError);
  HueRange red({{170, 180}, {0, 10}});  // unsorted input is fine
  CHECK(red.contains(0));
  CHECK(red.contains(9));
  CHECK_FALSE(red.contains(10));
  CHECK(red.contains(179));
}

TEST_CASE("hue_fraction counts pixels in range") {
  // 4 pixels, 2 with hue=5 (red range)
  auto hist = HsvHistogram::from_pixels(
      {{5, 100, 100}, {5, 50, 80}, {60, 20, 20}, {90, 10, 10}});
  CHECK(hue_fraction(hist, kRed) == doctest::Approx(0.5));

  auto empty = HsvHistogram(HistQuant{1, 1, 1}, {}, 0);
  CHECK(hue_fraction(empty, kRed) == 0.0);

  auto all_red = HsvHistogram::from_pixels({{0, 1, 2}, {175, 3, 4}, {9, 5, 6}});
  CHECK(hue_fraction(all_red, kRed) == 1.0);
}

TEST_CASE("extract_features hand-checked cases") {
  BinGrid grid(32, 32);
  std::vector<NamedColor> colors = {{"red", kRed}, {"blue", kBlue}};

  SUBCASE("two red at (250,250), two blue") {
    auto hist = HsvHistogram::from_pixels(
        {{5, 250, 250}, {5, 250, 250}, {110, 30, 30}, {110, 30, 30}});
    auto feats = extract_features(hist, colors, grid);
    const auto& red = feats.per_color.at("red");
    CHECK(red.hue_fraction == doctest::Approx(0.5));
    CHECK(red.pf.at(7, 7) == doctest::Approx(1.0));
    CHECK(red.pf.sum() == doctest::Approx(1.0));
    const auto& blue = feats.per_color.at("blue");
    CHECK(blue.pf.at(0, 0) == doctest::Approx(1.0));
  }

  SUBCASE("frame with no red pixels") {
    auto hist = HsvHistogram::from_pixels({{60, 10, 10}, {61, 20, 20}});
    auto feats = extract_features(hist, colors, grid);
    const auto& red = feats.per_color.at("red");
    CHECK(red.hue_fraction == 0.0);
    CHECK(red.hue_pixel_count == 0);
    CHECK(red.pf.sum() == 0.0);
  }

  SUBCASE("single red pixel at (0,0)") {
    auto hist = HsvHistogram::from_pixels({{0, 0, 0}});
    auto feats = extract_features(hist, colors, grid);
    CHECK(feats.per_color.at("red").pf.at(0, 0) == doctest::Approx(1.0));
  }

  SUBCASE("empty frame yields zero features") {
    auto hist = HsvHistogram(HistQuant{1, 32, 32}, {}, 0);
    auto feats = extract_features(hist, colors, grid);
    CHECK(feats.per_color.at("red").hue_fraction == 0.0);
    CHECK(feats.per_color.at("red").pf.sum() == 0.0);
    CHECK(feats.total_fg_pixels == 0);
  }
}

TEST_CASE("extract_features matches the pixel-level reference") {
  Rng rng(20240811);
  BinGrid grid(32, 32);
  std::vector<NamedColor> colors = {{"red", kRed}, {"blue", kBlue}};
  for (int iter = 0; iter < 50; ++iter) {
    auto pixels = random_pixels(rng, static_cast<int>(rng.uniform_int(1, 400)));
    auto expected = reference_features(pixels, colors, grid);
    auto got = extract_features(HsvHistogram::from_pixels(pixels), colors, grid);
    REQUIRE(got.per_color.size() == expected.per_color.size());
    for (const auto& [name, exp] : expected.per_color) {
      const auto& act = got.per_color.at(name);
      CHECK(act.hue_fraction == doctest::Approx(exp.hue_fraction));
      CHECK(act.hue_pixel_count == exp.hue_pixel_count);
      for (std::size_t k = 0; k < exp.pf.values.size(); ++k) {
        CHECK(act.pf.values[k] == doctest::Approx(exp.pf.values[k]));
      }
    }
  }
}

TEST_CASE("pf rows sum to one for colors with pixels") {
  Rng rng(99);
  BinGrid grid(32, 32);
  std::vector<NamedColor> colors = {{"red", kRed}};
  for (int iter = 0; iter < 30; ++iter) {
    auto pixels = random_pixels(rng, 500);
    auto feats = extract_features(HsvHistogram::from_pixels(pixels), colors, grid);
    const auto& red = feats.per_color.at("red");
    if (red.hue_pixel_count > 0) {
      CHECK(red.pf.sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
    for (double v : red.pf.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("coarsened histograms produce identical features") {
  Rng rng(7);
  BinGrid grid(32, 32);
  std::vector<NamedColor> colors = {{"red", kRed}, {"blue", kBlue}};
  for (int iter = 0; iter < 20; ++iter) {
    auto pixels = random_pixels(rng, 300);
    auto exact = extract_features(HsvHistogram::from_pixels(pixels), colors, grid);
    auto coarse =
        extract_features(quantize(pixels, HistQuant{1, 32, 32}), colors, grid);
    for (const auto& [name, exp] : exact.per_color) {
      const auto& act = coarse.per_color.at(name);
      CHECK(act.hue_fraction == exp.hue_fraction);
      for (std::size_t k = 0; k < exp.pf.values.size(); ++k) {
        CHECK(act.pf.values[k] == exp.pf.values[k]);
      }
    }
  }
}

TEST_CASE("grid finer than histogram quantization is rejected") {
  auto hist = quantize({{5, 250, 250}}, HistQuant{1, 64, 64});
  CHECK_THROWS_AS(
      extract_features(hist, {{"red", kRed}}, BinGrid(32, 32)), ConfigError);
  CHECK_NOTHROW(extract_features(hist, {{"red", kRed}}, BinGrid(64, 64)));
}

TEST_CASE("histogram validation") {
  CHECK_THROWS_AS(HsvHistogram(HistQuant{1, 32, 32}, {{0, 0, 0, 5}}, 4),
                  InputError);
  CHECK_THROWS_AS(HsvHistogram(HistQuant{1, 32, 32}, {{0, 8, 0, 4}}, 4),
                  InputError);  // s_cell out of range for step 32
  CHECK_THROWS_AS(HsvHistogram(HistQuant{7, 32, 32}, {}, 0), InputError);
  CHECK_THROWS_AS(HsvHistogram(HistQuant{1, 32, 32}, {{0, 0, 0, -1}}, -1),
                  InputError);
}

TEST_CASE("hue intervals must align to the histogram hue step") {
  auto hist = quantize({{4, 100, 100}}, HistQuant{2, 32, 32});
  CHECK_THROWS_AS(extract_features(hist, {{"odd", HueRange({{0, 9}})}},
                                   BinGrid(32, 32)),
                  ConfigError);
  CHECK_NOTHROW(extract_features(hist, {{"even", HueRange({{0, 10}})}},
                                 BinGrid(32, 32)));
}
