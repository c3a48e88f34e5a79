#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "commands.hpp"
#include "frameshed/errors.hpp"
#include "frameshed/io.hpp"

namespace frameshed::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunSummary {
  std::string dir;
  std::string baseline;
  double rate = 0.0;
  std::string lb_ms;
  std::string datasets;
  std::string dataset_hashes;
  double observed_drop_rate = 0.0;
  std::optional<double> qor;
  std::int64_t violations = 0;
  std::int64_t ingress = 0;
  std::int64_t forwarded = 0;
};

RunSummary load_summary(const std::string& dir) {
  const auto path = fs::path(dir) / "report.json";
  std::ifstream in(path);
  if (!in) throw InputError("no report.json in '" + dir + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  try {
    RunSummary s;
    s.dir = dir;
    const auto& cfg = doc.at("config");
    s.baseline = cfg.value("baseline", "utility");
    s.rate = std::stod(cfg.value("rate", "0"));
    s.lb_ms = cfg.value("lb_ms", "");
    s.datasets = cfg.value("datasets", "");
    for (const auto& [key, value] : cfg.items()) {
      if (key.rfind("dataset_hash_", 0) == 0) {
        s.dataset_hashes += value.get<std::string>() + ";";
      }
    }
    s.observed_drop_rate = doc.at("observed_drop_rate").get<double>();
    if (!doc.at("qor").at("overall").is_null()) {
      s.qor = doc["qor"]["overall"].get<double>();
    }
    const auto& totals = doc.at("totals");
    s.violations = totals.at("violations").get<std::int64_t>();
    s.ingress = totals.at("ingress").get<std::int64_t>();
    s.forwarded = totals.at("forwarded").get<std::int64_t>();
    return s;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace

int cmd_report(const ReportArgs& args) {
  if (args.run_dirs.empty()) throw InputError("at least one --run is required");
  std::vector<RunSummary> runs;
  for (const auto& dir : args.run_dirs) runs.push_back(load_summary(dir));

  // Runs are comparable only against the same dataset content and latency
  // bound; hashes catch datasets regenerated under the same path.
  std::string mismatches;
  for (const auto& r : runs) {
    if (r.dataset_hashes != runs.front().dataset_hashes) {
      mismatches += "  " + r.dir + ": dataset hashes " + r.dataset_hashes +
                    " vs " + runs.front().dataset_hashes + " (" + r.datasets +
                    ")\n";
    }
    if (r.lb_ms != runs.front().lb_ms) {
      mismatches += "  " + r.dir + ": lb_ms '" + r.lb_ms + "' vs '" +
                    runs.front().lb_ms + "'\n";
    }
  }
  if (!mismatches.empty()) {
    throw InputError("runs are not comparable:\n" + mismatches);
  }

  fs::create_directories(args.out_dir);
  {
    std::ofstream out(fs::path(args.out_dir) / "tradeoff.csv");
    out << "run,baseline,target_rate,observed_drop_rate,qor,violations\n";
    for (const auto& r : runs) {
      out << r.dir << "," << r.baseline << "," << format_double(r.rate) << ","
          << format_double(r.observed_drop_rate) << ","
          << (r.qor ? format_double(*r.qor) : "") << "," << r.violations
          << "\n";
    }
  }
  {
    std::ofstream out(fs::path(args.out_dir) / "violations.csv");
    out << "run,baseline,ingress,forwarded,violations\n";
    for (const auto& r : runs) {
      out << r.dir << "," << r.baseline << "," << r.ingress << ","
          << r.forwarded << "," << r.violations << "\n";
    }
  }
  std::printf("aggregated %zu run(s) into %s\n", runs.size(),
              args.out_dir.c_str());
  return 0;
}

}  // namespace frameshed::cli
