#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "frameshed/sim.hpp"
#include "frameshed/threshold_policy.hpp"
#include "frameshed/utility_model.hpp"

namespace frameshed {

// Colors config: JSON map from color name to a list of [lo,hi) hue intervals,
// e.g. {"red": [[0,10],[170,180]]}.
std::vector<NamedColor> load_colors_config(const std::filesystem::path& path);
void save_colors_config(const std::filesystem::path& path,
                        const std::vector<NamedColor>& colors);

// Frame datasets: JSON-lines, one object per frame
//   {"frame_id":..,"camera_id":..,"ts_ms":..,
//    "objects":[{"object_id":..,"color":".."}],
//    "hist":{"quant":[1,32,32],"cells":[[h,s_cell,v_cell,count],..],"total":N},
//    "stage_flags":{"passes_blob_filter":..,"passes_color_filter":..}}
// preceded by a header line recording the quantization. Raw video frames are
// not accepted anywhere; histogram ingestion is the only input path.
std::vector<FrameRecord> load_dataset_jsonl(const std::filesystem::path& path);
void save_dataset_jsonl(const std::filesystem::path& path,
                        std::span<const FrameRecord> frames);

// Model files: JSON with grid, hue ranges, dense row-major m_pos/m_neg,
// norm, training counts, training utilities, and a content hash.
void save_model(const std::filesystem::path& path, const UtilityModel& model);
UtilityModel load_model(const std::filesystem::path& path);
std::string model_content_hash(const UtilityModel& model);

// FNV-1a 64 over a file's bytes, hex-encoded; used to pair runs with the
// dataset they consumed.
std::string file_content_hash(const std::filesystem::path& path);

// Run artifacts written into a directory: report.json, frames.csv,
// timeseries.csv, control_log.csv, decisions.jsonl.
void write_run_artifacts(const std::filesystem::path& out_dir,
                         const RunReport& report,
                         const std::map<std::string, std::string>& config_echo);

void write_cdf_csv(const std::filesystem::path& path, const UtilityCdf& cdf);

// Writes "<model>.summary.csv" plus one m_pos heatmap CSV per color.
void write_model_summary(const std::filesystem::path& model_path,
                         const UtilityModel& model);

std::string format_double(double v);

}  // namespace frameshed
