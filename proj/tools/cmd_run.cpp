#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "commands.hpp"
#include "frameshed/io.hpp"
#include "util.hpp"

namespace frameshed::cli {

using nlohmann::json;

namespace {

LatencySpec parse_latency(const json& j) {
  if (j.is_number()) return LatencySpec::constant(j.get<double>());
  if (j.contains("uniform")) {
    return LatencySpec::uniform(j["uniform"].at(0).get<double>(),
                                j["uniform"].at(1).get<double>());
  }
  if (j.contains("normal")) {
    return LatencySpec::normal(j["normal"].at(0).get<double>(),
                               j["normal"].at(1).get<double>());
  }
  throw ConfigError("operator latency must be a number or {uniform|normal:[a,b]}");
}

PassRule parse_pass_rule(const std::string& name) {
  if (name == "all") return PassRule::kAll;
  if (name == "blob") return PassRule::kBlobFlag;
  if (name == "color") return PassRule::kColorFlag;
  throw ConfigError("unknown pass rule '" + name + "'");
}

// Optional JSON config; flag values take precedence where both are given.
SimConfig load_sim_config(const std::string& path) {
  SimConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError("config '" + path + "': " + e.what());
  }
  try {
    if (doc.value("schema", "frameshed-config") != "frameshed-config") {
      throw ConfigError("'" + path + "' is not a frameshed config");
    }
    cfg.control.latency_bound_ms = doc.value("lb_ms", cfg.control.latency_bound_ms);
    cfg.control.update_period_ms =
        doc.value("update_period_ms", cfg.control.update_period_ms);
    if (doc.contains("estimator")) {
      const auto est = doc["estimator"].get<std::string>();
      if (est == "ewma") {
        cfg.control.estimator = ProcEstimator::kEwma;
      } else if (est == "mean") {
        cfg.control.estimator = ProcEstimator::kWindowMean;
      } else {
        throw ConfigError("estimator must be 'ewma' or 'mean'");
      }
    }
    cfg.control.ewma_alpha = doc.value("ewma_alpha", cfg.control.ewma_alpha);
    cfg.control.proc_includes_backend_queue = doc.value(
        "proc_includes_backend_queue", cfg.control.proc_includes_backend_queue);
    cfg.net_cam_ls_ms = doc.value("net_cam_ls_ms", cfg.net_cam_ls_ms);
    cfg.net_ls_q_ms = doc.value("net_ls_q_ms", cfg.net_ls_q_ms);
    cfg.proc_cam_ms = doc.value("proc_cam_ms", cfg.proc_cam_ms);
    cfg.history_capacity = doc.value("history_capacity", cfg.history_capacity);
    cfg.max_tokens = doc.value("max_tokens", cfg.max_tokens);
    cfg.initial_queue_capacity =
        doc.value("initial_queue_capacity", cfg.initial_queue_capacity);
    if (doc.contains("operators")) {
      cfg.operators.clear();
      for (const auto& opj : doc["operators"]) {
        OperatorProfile op;
        op.name = opj.at("name").get<std::string>();
        op.exec_latency_ms = parse_latency(opj.at("latency_ms"));
        op.pass_rule = parse_pass_rule(opj.value("pass", "all"));
        cfg.operators.push_back(std::move(op));
      }
    } else if (doc.contains("dnn_ms")) {
      cfg.operators = default_operator_chain(doc["dnn_ms"].get<double>());
    }
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return cfg;
}

}  // namespace

int cmd_run(const RunArgs& args) {
  SimConfig cfg = load_sim_config(args.config_path);
  cfg.seed = args.seed;
  if (args.lb_ms) cfg.control.latency_bound_ms = *args.lb_ms;
  cfg.seed_history_from_model = !args.no_seed_history;

  UtilityModel model;
  const UtilityModel* model_ptr = nullptr;
  if (args.baseline == "utility") {
    if (args.model_path.empty()) {
      throw InputError("--model is required for the utility baseline");
    }
    model = load_model(args.model_path);
    model_ptr = &model;
    cfg.policy = ShedPolicy::kUtility;
  } else if (args.baseline == "random") {
    cfg.policy = ShedPolicy::kRandom;
    cfg.random_rate = args.rate;
    if (args.rate < 0.0 || args.rate > 1.0) {
      throw InputError("--rate must be in [0,1]");
    }
  } else {
    throw InputError("--baseline must be 'utility' or 'random'");
  }

  const auto dataset = load_merged_datasets(args.datasets);
  auto report = run_simulation(cfg, model_ptr, dataset);

  std::map<std::string, std::string> echo;
  echo["baseline"] = args.baseline;
  echo["seed"] = std::to_string(args.seed);
  echo["lb_ms"] = format_double(cfg.control.latency_bound_ms);
  echo["rate"] = format_double(cfg.random_rate);
  echo["model"] = args.model_path;
  echo["config"] = args.config_path;
  std::string dataset_names;
  std::uint64_t combined = 0;
  for (const auto& p : args.datasets) {
    if (!dataset_names.empty()) dataset_names += ";";
    dataset_names += p;
    const auto h = file_content_hash(p);
    echo["dataset_hash_" + std::to_string(combined++)] = h;
  }
  echo["datasets"] = dataset_names;

  write_run_artifacts(args.out_dir, report, echo);
  if (!report.final_history.empty()) {
    write_cdf_csv(std::filesystem::path(args.out_dir) / "cdf.csv",
                  build_cdf(std::span<const double>(report.final_history)));
  }

  std::printf("run complete: ingress=%lld forwarded=%lld shed=%lld "
              "violations=%lld drop_rate=%s qor=%s\n",
              static_cast<long long>(report.shed.ingress),
              static_cast<long long>(report.shed.forwarded),
              static_cast<long long>(report.shed.total_shed()),
              static_cast<long long>(report.violations),
              format_double(report.observed_drop_rate).c_str(),
              report.overall_qor ? format_double(*report.overall_qor).c_str()
                                 : "n/a");
  return 0;
}

}  // namespace frameshed::cli
