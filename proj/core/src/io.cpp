#include "frameshed/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "frameshed/errors.hpp"

namespace frameshed {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

json hue_ranges_to_json(const HueRange& range) {
  json arr = json::array();
  for (const auto& iv : range.intervals()) arr.push_back({iv.lo, iv.hi});
  return arr;
}

HueRange hue_ranges_from_json(const json& arr) {
  std::vector<HueInterval> intervals;
  for (const auto& iv : arr) {
    intervals.push_back({iv.at(0).get<int>(), iv.at(1).get<int>()});
  }
  return HueRange(std::move(intervals));
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<NamedColor> load_colors_config(const std::filesystem::path& path) {
  auto in = open_in(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError("colors config '" + path.string() + "': " + e.what());
  }
  if (!doc.is_object() || doc.empty()) {
    throw InputError("colors config must be a non-empty JSON object");
  }
  std::vector<NamedColor> colors;
  for (const auto& [name, arr] : doc.items()) {
    try {
      colors.push_back({name, hue_ranges_from_json(arr)});
    } catch (const json::exception& e) {
      throw InputError("colors config entry '" + name + "': " + e.what());
    }
  }
  return colors;
}

void save_colors_config(const std::filesystem::path& path,
                        const std::vector<NamedColor>& colors) {
  json doc = json::object();
  for (const auto& c : colors) doc[c.name] = hue_ranges_to_json(c.range);
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

std::vector<FrameRecord> load_dataset_jsonl(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<FrameRecord> frames;
  std::string line;
  std::size_t line_no = 0;
  HistQuant expected_quant{};
  bool have_quant = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
    try {
      if (doc.contains("schema")) {
        // Header line; records the quantization all frames must use.
        if (doc.contains("quant")) {
          expected_quant = {doc["quant"].at(0).get<int>(),
                            doc["quant"].at(1).get<int>(),
                            doc["quant"].at(2).get<int>()};
          have_quant = true;
        }
        continue;
      }
      FrameRecord fr;
      fr.frame_id = doc.at("frame_id").get<std::int64_t>();
      fr.camera_id = doc.at("camera_id").get<std::int32_t>();
      fr.generation_ts_ms = doc.at("ts_ms").get<std::int64_t>();
      for (const auto& obj : doc.at("objects")) {
        fr.objects.push_back({obj.at("object_id").get<std::int64_t>(),
                              obj.at("color").get<std::string>()});
      }
      const auto& h = doc.at("hist");
      HistQuant quant{h.at("quant").at(0).get<int>(),
                      h.at("quant").at(1).get<int>(),
                      h.at("quant").at(2).get<int>()};
      if (have_quant && !(quant == expected_quant)) {
        throw InputError(path.string() + ":" + std::to_string(line_no) +
                         ": frame quantization differs from file header");
      }
      std::vector<HistCell> cells;
      for (const auto& c : h.at("cells")) {
        cells.push_back({c.at(0).get<std::int32_t>(), c.at(1).get<std::int32_t>(),
                         c.at(2).get<std::int32_t>(), c.at(3).get<std::int64_t>()});
      }
      fr.hist = HsvHistogram(quant, std::move(cells),
                             h.at("total").get<std::int64_t>());
      if (doc.contains("stage_flags")) {
        const auto& sf = doc["stage_flags"];
        fr.stage_flags = {sf.at("passes_blob_filter").get<bool>(),
                          sf.at("passes_color_filter").get<bool>()};
      } else {
        const bool has_objects = !fr.objects.empty();
        fr.stage_flags = {has_objects, has_objects};
      }
      frames.push_back(std::move(fr));
    } catch (const json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return frames;
}

void save_dataset_jsonl(const std::filesystem::path& path,
                        std::span<const FrameRecord> frames) {
  auto out = open_out(path);
  HistQuant quant = frames.empty() ? HistQuant{} : frames.front().hist.quant();
  json header = {
      {"schema", "frameshed-dataset"},
      {"version", 1},
      {"quant", {quant.hue_step, quant.sat_step, quant.val_step}},
  };
  out << header.dump() << "\n";
  for (const auto& fr : frames) {
    json objects = json::array();
    for (const auto& o : fr.objects) {
      objects.push_back({{"object_id", o.object_id}, {"color", o.color}});
    }
    json cells = json::array();
    for (const auto& c : fr.hist.cells()) {
      cells.push_back({c.h_cell, c.s_cell, c.v_cell, c.count});
    }
    const auto& q = fr.hist.quant();
    json doc = {
        {"frame_id", fr.frame_id},
        {"camera_id", fr.camera_id},
        {"ts_ms", fr.generation_ts_ms},
        {"objects", objects},
        {"hist",
         {{"quant", {q.hue_step, q.sat_step, q.val_step}},
          {"cells", cells},
          {"total", fr.hist.total_fg_pixels()}}},
        {"stage_flags",
         {{"passes_blob_filter", fr.stage_flags.passes_blob_filter},
          {"passes_color_filter", fr.stage_flags.passes_color_filter}}},
    };
    out << doc.dump() << "\n";
  }
}

namespace {

json model_to_json(const UtilityModel& model) {
  json colors = json::object();
  for (const auto& [name, cm] : model.colors) {
    colors[name] = {
        {"hue_ranges", hue_ranges_to_json(cm.range)},
        {"m_pos", cm.m_pos.values},
        {"m_neg", cm.m_neg.values},
        {"norm", cm.norm},
        {"n_pos", cm.n_pos},
        {"n_neg", cm.n_neg},
    };
  }
  return json{
      {"schema", "frameshed-model"},
      {"version", model.version},
      {"grid",
       {{"sat_bin_size", model.grid.sat_bin_size()},
        {"val_bin_size", model.grid.val_bin_size()}}},
      {"query", model.query.to_string()},
      {"colors", colors},
      {"training_utilities", model.training_utilities},
  };
}

}  // namespace

std::string model_content_hash(const UtilityModel& model) {
  return hex64(fnv1a(model_to_json(model).dump()));
}

void save_model(const std::filesystem::path& path, const UtilityModel& model) {
  json doc = model_to_json(model);
  doc["content_hash"] = model_content_hash(model);
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

UtilityModel load_model(const std::filesystem::path& path) {
  auto in = open_in(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError("model file '" + path.string() + "': " + e.what());
  }
  try {
    if (doc.at("schema").get<std::string>() != "frameshed-model") {
      throw InputError("'" + path.string() + "' is not a model file");
    }
    UtilityModel model;
    model.version = doc.at("version").get<std::string>();
    model.grid = BinGrid(doc.at("grid").at("sat_bin_size").get<int>(),
                         doc.at("grid").at("val_bin_size").get<int>());
    model.query = QueryExpr::parse(doc.at("query").get<std::string>());
    for (const auto& [name, cj] : doc.at("colors").items()) {
      ColorModel cm;
      cm.color_name = name;
      cm.range = hue_ranges_from_json(cj.at("hue_ranges"));
      cm.grid = model.grid;
      cm.m_pos.n_sat = model.grid.n_sat_bins();
      cm.m_pos.n_val = model.grid.n_val_bins();
      cm.m_pos.values = cj.at("m_pos").get<std::vector<double>>();
      cm.m_neg.n_sat = model.grid.n_sat_bins();
      cm.m_neg.n_val = model.grid.n_val_bins();
      cm.m_neg.values = cj.at("m_neg").get<std::vector<double>>();
      if (cm.m_pos.values.size() != static_cast<std::size_t>(model.grid.n_bins()) ||
          cm.m_neg.values.size() != static_cast<std::size_t>(model.grid.n_bins())) {
        throw InputError("model matrices do not match the grid");
      }
      cm.norm = cj.at("norm").get<double>();
      cm.n_pos = cj.at("n_pos").get<std::int64_t>();
      cm.n_neg = cj.at("n_neg").get<std::int64_t>();
      model.colors.emplace(name, std::move(cm));
    }
    if (doc.contains("training_utilities")) {
      model.training_utilities =
          doc["training_utilities"].get<std::vector<double>>();
    }
    if (doc.contains("content_hash")) {
      const auto expected = doc["content_hash"].get<std::string>();
      if (expected != model_content_hash(model)) {
        throw InputError("model file '" + path.string() +
                         "' content hash mismatch");
      }
    }
    validate_model(model);
    return model;
  } catch (const json::exception& e) {
    throw InputError("model file '" + path.string() + "': " + e.what());
  }
}

std::string file_content_hash(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return hex64(h);
}

void write_cdf_csv(const std::filesystem::path& path, const UtilityCdf& cdf) {
  auto out = open_out(path);
  out << "utility,cumulative_fraction\n";
  for (const auto& step : cdf.steps()) {
    out << format_double(step.utility) << "," << format_double(step.cumulative)
        << "\n";
  }
}

void write_model_summary(const std::filesystem::path& model_path,
                         const UtilityModel& model) {
  const auto base = model_path.parent_path() / model_path.stem();
  {
    auto out = open_out(base.string() + ".summary.csv");
    out << "color,n_pos,n_neg,norm\n";
    for (const auto& [name, cm] : model.colors) {
      out << name << "," << cm.n_pos << "," << cm.n_neg << ","
          << format_double(cm.norm) << "\n";
    }
  }
  for (const auto& [name, cm] : model.colors) {
    auto out = open_out(base.string() + "." + name + ".m_pos.csv");
    for (int i = 0; i < cm.m_pos.n_sat; ++i) {
      for (int j = 0; j < cm.m_pos.n_val; ++j) {
        out << (j == 0 ? "" : ",") << format_double(cm.m_pos.at(i, j));
      }
      out << "\n";
    }
  }
}

void write_run_artifacts(const std::filesystem::path& out_dir,
                         const RunReport& report,
                         const std::map<std::string, std::string>& config_echo) {
  std::filesystem::create_directories(out_dir);

  {
    json totals = {
        {"ingress", report.shed.ingress},
        {"forwarded", report.shed.forwarded},
        {"shed_threshold", report.shed.shed_threshold},
        {"shed_queue_eviction", report.shed.shed_queue_eviction},
        {"shed_resize", report.shed.shed_resize},
        {"shed_deadline", report.shed.shed_deadline},
        {"rejected", report.shed.rejected},
        {"completed", report.completed},
        {"violations", report.violations},
    };
    json per_object = json::object();
    for (const auto& [id, qor] : report.per_object_qor) {
      per_object[std::to_string(id)] = qor;
    }
    json qor = {{"per_object", per_object}};
    if (report.overall_qor) {
      qor["overall"] = *report.overall_qor;
    } else {
      qor["overall"] = nullptr;
      qor["note"] = report.qor_note;
    }
    json doc = {
        {"schema", "frameshed-report"},
        {"version", 1},
        {"config", config_echo},
        {"totals", totals},
        {"observed_drop_rate", report.observed_drop_rate},
        {"qor", qor},
        {"max_queue_len", report.max_queue_len},
    };
    auto out = open_out(out_dir / "report.json");
    out << doc.dump(2) << "\n";
  }

  {
    auto out = open_out(out_dir / "frames.csv");
    out << "frame_id,camera_id,generation_ts_ms,utility,decision,e2e_ms,"
           "violation\n";
    for (const auto& f : report.frames) {
      out << f.frame_id << "," << f.camera_id << "," << f.generation_ts_ms
          << "," << format_double(f.utility) << ","
          << (f.decided ? to_string(f.decision) : "in_queue") << ","
          << (f.completed ? format_double(f.e2e_ms) : "") << ","
          << (f.violation ? "1" : "0") << "\n";
    }
  }

  {
    auto out = open_out(out_dir / "timeseries.csv");
    out << "bucket_start_ms,arrivals,forwarded,shed_threshold,"
           "shed_queue_eviction,shed_resize,shed_deadline,completed,violations,"
           "mean_e2e_ms,max_e2e_ms,proc_q_est_ms,threshold,capacity";
    for (const auto& name : report.operator_names) out << ",frames_" << name;
    out << "\n";
    for (const auto& row : report.timeseries) {
      out << row.bucket_start_ms << "," << row.arrivals << "," << row.forwarded
          << "," << row.shed_threshold << "," << row.shed_queue_eviction << ","
          << row.shed_resize << "," << row.shed_deadline << "," << row.completed
          << "," << row.violations << "," << format_double(row.mean_e2e_ms)
          << "," << format_double(row.max_e2e_ms) << ","
          << format_double(row.proc_q_est_ms) << ","
          << (row.threshold ? format_double(*row.threshold) : "") << ","
          << row.capacity;
      for (std::size_t k = 0; k < report.operator_names.size(); ++k) {
        out << "," << (k < row.stage_counts.size() ? row.stage_counts[k] : 0);
      }
      out << "\n";
    }
  }

  {
    auto out = open_out(out_dir / "control_log.csv");
    out << "t_ms,proc_q_ms,fps_in,st_fps,target_drop_rate,u_th,capacity\n";
    for (const auto& rec : report.control_log) {
      out << format_double(rec.t_ms) << "," << format_double(rec.proc_q_ms)
          << "," << format_double(rec.fps_in) << "," << format_double(rec.st_fps)
          << "," << format_double(rec.target_drop_rate) << ","
          << (rec.threshold.value ? format_double(*rec.threshold.value) : "")
          << "," << rec.capacity << "\n";
    }
  }

  {
    auto out = open_out(out_dir / "decisions.jsonl");
    for (const auto& d : report.decisions) {
      json doc = {
          {"frame_id", d.frame_id},
          {"camera_id", d.camera_id},
          {"utility", d.utility},
          {"decision", to_string(d.decision)},
          {"u_th_at_decision", d.threshold ? json(*d.threshold) : json(nullptr)},
          {"ts", d.ts_ms},
      };
      out << doc.dump() << "\n";
    }
  }
}

}  // namespace frameshed
