#pragma once

#include <string>
#include <vector>

#include "frameshed/color_features.hpp"
#include "frameshed/errors.hpp"
#include "frameshed/io.hpp"
#include "frameshed/sim.hpp"

namespace frameshed::cli {

// "32x32" -> BinGrid
inline BinGrid parse_grid(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) {
    throw ConfigError("grid must look like '32x32'");
  }
  try {
    return BinGrid(std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1)));
  } catch (const std::logic_error&) {
    throw ConfigError("grid must look like '32x32'");
  }
}

inline std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const auto item = text.substr(pos, comma - pos);
    if (!item.empty()) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::logic_error&) {
        throw InputError("bad number '" + item + "' in list");
      }
    }
    pos = comma + 1;
  }
  return out;
}

inline std::vector<FrameRecord> load_merged_datasets(
    const std::vector<std::string>& paths) {
  if (paths.empty()) throw InputError("at least one --dataset is required");
  std::vector<std::vector<FrameRecord>> streams;
  streams.reserve(paths.size());
  for (const auto& p : paths) streams.push_back(load_dataset_jsonl(p));
  return interleave_cameras(std::move(streams));
}

}  // namespace frameshed::cli
