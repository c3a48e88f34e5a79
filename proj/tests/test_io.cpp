#include "frameshed/io.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "frameshed/errors.hpp"
#include "frameshed/rng.hpp"
#include "frameshed/synthetic.hpp"
#include "frameshed/trainer.hpp"

using namespace frameshed;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("frameshed-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static inline int counter = 0;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("dataset JSONL round trip") {
  TempDir tmp;
  SeparableCorpusSpec spec;
  spec.cameras = 2;
  spec.frames_per_camera = 50;
  auto frames = generate_separable_corpus(spec, 11);

  const auto path = tmp.path / "dataset.jsonl";
  save_dataset_jsonl(path, frames);
  auto loaded = load_dataset_jsonl(path);
  REQUIRE(loaded.size() == frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(loaded[i].frame_id == frames[i].frame_id);
    CHECK(loaded[i].camera_id == frames[i].camera_id);
    CHECK(loaded[i].generation_ts_ms == frames[i].generation_ts_ms);
    CHECK(loaded[i].objects.size() == frames[i].objects.size());
    CHECK(loaded[i].stage_flags.passes_blob_filter ==
          frames[i].stage_flags.passes_blob_filter);
    CHECK(loaded[i].stage_flags.passes_color_filter ==
          frames[i].stage_flags.passes_color_filter);
    CHECK(loaded[i].hist.total_fg_pixels() == frames[i].hist.total_fg_pixels());
    REQUIRE(loaded[i].hist.cells().size() == frames[i].hist.cells().size());
  }

  // Saving the loaded copy reproduces the file byte for byte.
  const auto path2 = tmp.path / "dataset2.jsonl";
  save_dataset_jsonl(path2, loaded);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("dataset loader reports malformed lines and quant mismatches") {
  TempDir tmp;
  const auto path = tmp.path / "bad.jsonl";
  {
    std::ofstream out(path);
    out << R"({"schema":"frameshed-dataset","version":1,"quant":[1,32,32]})" << "\n";
    out << R"({"frame_id":0,"camera_id":0,"ts_ms":0,"objects":[],"hist":{"quant":[1,64,64],"cells":[[0,1,1,4]],"total":4}})"
        << "\n";
  }
  CHECK_THROWS_AS(load_dataset_jsonl(path), InputError);

  const auto garbled = tmp.path / "garbled.jsonl";
  {
    std::ofstream out(garbled);
    out << "{not json}\n";
  }
  CHECK_THROWS_AS(load_dataset_jsonl(garbled), InputError);

  CHECK_THROWS_AS(load_dataset_jsonl(tmp.path / "missing.jsonl"), InputError);
}

TEST_CASE("stage flags default to object presence when absent") {
  TempDir tmp;
  const auto path = tmp.path / "minimal.jsonl";
  {
    std::ofstream out(path);
    out << R"({"frame_id":1,"camera_id":0,"ts_ms":0,"objects":[{"object_id":4,"color":"red"}],"hist":{"quant":[1,32,32],"cells":[[5,7,7,10]],"total":10}})"
        << "\n";
    out << R"({"frame_id":2,"camera_id":0,"ts_ms":100,"objects":[],"hist":{"quant":[1,32,32],"cells":[[90,1,1,10]],"total":10}})"
        << "\n";
  }
  auto frames = load_dataset_jsonl(path);
  REQUIRE(frames.size() == 2);
  CHECK(frames[0].stage_flags.passes_blob_filter);
  CHECK(frames[0].stage_flags.passes_color_filter);
  CHECK_FALSE(frames[1].stage_flags.passes_blob_filter);
}

TEST_CASE("colors config round trip and validation") {
  TempDir tmp;
  const auto path = tmp.path / "colors.json";
  save_colors_config(path, default_colors());
  auto colors = load_colors_config(path);
  REQUIRE(colors.size() == 2);
  CHECK(colors[0].name == "red");
  CHECK(colors[0].range.contains(5));
  CHECK(colors[0].range.contains(175));
  CHECK_FALSE(colors[0].range.contains(90));

  const auto bad = tmp.path / "bad.json";
  {
    std::ofstream out(bad);
    out << R"({"red": [[170, 200]]})";
  }
  CHECK_THROWS_AS(load_colors_config(bad), Error);

  const auto empty = tmp.path / "empty.json";
  {
    std::ofstream out(empty);
    out << "{}";
  }
  CHECK_THROWS_AS(load_colors_config(empty), InputError);
}

TEST_CASE("model save/load round trip scores bitwise-identically") {
  TempDir tmp;
  SeparableCorpusSpec spec;
  spec.cameras = 3;
  spec.frames_per_camera = 120;
  auto corpus = generate_separable_corpus(spec, 21);
  auto model = train_utility_model(corpus, default_colors(),
                                   QueryExpr::parse("red"), {BinGrid(32, 32)});

  const auto path = tmp.path / "model.json";
  save_model(path, model);
  auto loaded = load_model(path);

  CHECK(loaded.query.to_string() == model.query.to_string());
  CHECK(loaded.grid == model.grid);
  CHECK(loaded.training_utilities == model.training_utilities);

  std::vector<NamedColor> colors;
  for (const auto& [name, cm] : model.colors) colors.push_back({name, cm.range});
  for (std::size_t i = 0; i < corpus.size(); i += 13) {
    auto feats = extract_features(corpus[i].hist, colors, model.grid);
    const double a = query_utility(model, feats);
    const double b = query_utility(loaded, feats);
    CHECK(a == b);  // exact, not approximate
  }

  // Re-saving the loaded model reproduces the file bytes.
  const auto path2 = tmp.path / "model2.json";
  save_model(path2, loaded);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("model loader rejects tampered files") {
  TempDir tmp;
  SeparableCorpusSpec spec;
  spec.cameras = 2;
  spec.frames_per_camera = 60;
  auto corpus = generate_separable_corpus(spec, 5);
  auto model = train_utility_model(corpus, default_colors(),
                                   QueryExpr::parse("red"), {BinGrid(32, 32)});
  const auto path = tmp.path / "model.json";
  save_model(path, model);

  auto text = slurp(path);
  const auto pos = text.find("\"norm\":");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 8, "\"norm\": 9");
  {
    std::ofstream out(path, std::ios::binary);
    out << text;
  }
  CHECK_THROWS_AS(load_model(path), InputError);
}

TEST_CASE("run artifacts are written and deterministic") {
  TempDir tmp;
  SeparableCorpusSpec spec;
  spec.cameras = 2;
  spec.frames_per_camera = 100;
  auto corpus = generate_separable_corpus(spec, 31);
  auto model = train_utility_model(corpus, default_colors(),
                                   QueryExpr::parse("red"), {BinGrid(32, 32)});
  SimConfig cfg;
  auto report = run_simulation(cfg, &model, corpus);

  const std::map<std::string, std::string> echo = {{"seed", "1"},
                                                   {"policy", "utility"}};
  write_run_artifacts(tmp.path / "run_a", report, echo);
  write_run_artifacts(tmp.path / "run_b", report, echo);
  for (const char* name :
       {"report.json", "frames.csv", "timeseries.csv", "control_log.csv",
        "decisions.jsonl"}) {
    CAPTURE(name);
    CHECK(fs::exists(tmp.path / "run_a" / name));
    CHECK(slurp(tmp.path / "run_a" / name) == slurp(tmp.path / "run_b" / name));
  }
}

TEST_CASE("file content hash distinguishes different files") {
  TempDir tmp;
  const auto a = tmp.path / "a";
  const auto b = tmp.path / "b";
  {
    std::ofstream(a) << "hello";
    std::ofstream(b) << "hellp";
  }
  CHECK(file_content_hash(a) != file_content_hash(b));
  CHECK(file_content_hash(a) == file_content_hash(a));
}

TEST_CASE("cdf csv dump") {
  TempDir tmp;
  UtilityHistory h(8);
  for (double v : {0.1, 0.2, 0.2, 0.4}) h.push(v);
  const auto path = tmp.path / "cdf.csv";
  write_cdf_csv(path, build_cdf(h));
  const auto text = slurp(path);
  CHECK(text.find("utility,cumulative_fraction") == 0);
  CHECK(text.find("0.2,0.75") != std::string::npos);
}
