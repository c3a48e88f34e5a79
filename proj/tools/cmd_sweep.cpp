#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "commands.hpp"
#include "frameshed/io.hpp"
#include "frameshed/trainer.hpp"
#include "util.hpp"

namespace frameshed::cli {

namespace {

std::vector<double> frame_utilities(const UtilityModel& model,
                                    const std::vector<FrameRecord>& dataset) {
  std::vector<NamedColor> colors;
  for (const auto& [name, cm] : model.colors) colors.push_back({name, cm.range});
  std::vector<double> utilities;
  utilities.reserve(dataset.size());
  for (const auto& fr : dataset) {
    utilities.push_back(
        query_utility(model, extract_features(fr.hist, colors, model.grid)));
  }
  return utilities;
}

struct SweepRow {
  std::optional<double> target_rate;
  Threshold threshold;
  double observed_drop_rate;
  std::optional<double> qor;
};

// Offline threshold application: shed iff utility <= u_th.
SweepRow evaluate_threshold(const UtilityModel& model,
                            const std::vector<FrameRecord>& dataset,
                            const std::vector<double>& utilities,
                            Threshold threshold) {
  ForwardedMap forwarded;
  std::int64_t shed = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const bool drop = threshold.sheds(utilities[i]);
    forwarded[dataset[i].frame_id] = !drop;
    if (drop) ++shed;
  }
  SweepRow row;
  row.threshold = threshold;
  row.observed_drop_rate =
      dataset.empty() ? 0.0
                      : static_cast<double>(shed) /
                            static_cast<double>(dataset.size());
  row.qor = overall_qor(forwarded, dataset, model.query.colors());
  return row;
}

int run_cross_validation(const SweepArgs& args) {
  if (args.colors_path.empty()) {
    throw InputError("--cross-validate requires --colors (folds retrain)");
  }
  const auto colors = load_colors_config(args.colors_path);
  const auto query = QueryExpr::parse(args.query);
  const auto dataset = load_merged_datasets(args.datasets);
  TrainOptions options;
  options.grid = parse_grid(args.grid);
  options.store_training_utilities = false;

  std::set<std::int32_t> cameras;
  for (const auto& fr : dataset) cameras.insert(fr.camera_id);
  if (cameras.size() < 2) {
    throw InputError("cross-validation needs at least two cameras");
  }

  std::ofstream out(args.out_path);
  if (!out) throw InputError("cannot open '" + args.out_path + "'");
  out << "fold_camera,n_pos,n_neg,min_pos,max_neg,median_pos,p95_neg,separated\n";

  for (std::int32_t held_out : cameras) {
    std::vector<FrameRecord> train_set, test_set;
    for (const auto& fr : dataset) {
      (fr.camera_id == held_out ? test_set : train_set).push_back(fr);
    }
    auto model = train_utility_model(train_set, colors, query, options);
    auto utilities = frame_utilities(model, test_set);

    std::vector<double> pos, neg;
    const auto target_colors = query.colors();
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      const bool positive = std::any_of(
          test_set[i].objects.begin(), test_set[i].objects.end(),
          [&](const GroundTruthObject& o) {
            return std::find(target_colors.begin(), target_colors.end(),
                             o.color) != target_colors.end();
          });
      (positive ? pos : neg).push_back(utilities[i]);
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    const double min_pos = pos.empty() ? 0.0 : pos.front();
    const double max_neg = neg.empty() ? 0.0 : neg.back();
    const double median_pos = pos.empty() ? 0.0 : pos[pos.size() / 2];
    const double p95_neg =
        neg.empty() ? 0.0 : neg[static_cast<std::size_t>(0.95 * (neg.size() - 1))];
    out << held_out << "," << pos.size() << "," << neg.size() << ","
        << format_double(min_pos) << "," << format_double(max_neg) << ","
        << format_double(median_pos) << "," << format_double(p95_neg) << ","
        << (min_pos > max_neg ? 1 : 0) << "\n";
  }
  std::printf("cross-validation folds written to %s\n", args.out_path.c_str());
  return 0;
}

}  // namespace

int cmd_sweep(const SweepArgs& args) {
  if (args.cross_validate) return run_cross_validation(args);

  if (args.model_path.empty()) throw InputError("--model is required");
  const auto model = load_model(args.model_path);
  const auto dataset = load_merged_datasets(args.datasets);
  const auto utilities = frame_utilities(model, dataset);

  std::vector<SweepRow> rows;
  if (!args.rates.empty()) {
    const auto cdf = build_cdf(std::span<const double>(utilities));
    for (double rate : parse_double_list(args.rates)) {
      auto row = evaluate_threshold(model, dataset, utilities,
                                    threshold_for_drop_rate(cdf, rate));
      row.target_rate = rate;
      rows.push_back(row);
    }
  } else {
    std::vector<double> thresholds;
    if (!args.thresholds.empty()) {
      thresholds = parse_double_list(args.thresholds);
    } else {
      for (int i = 0; i <= args.steps; ++i) {
        thresholds.push_back(static_cast<double>(i) /
                             static_cast<double>(args.steps));
      }
    }
    for (double th : thresholds) {
      rows.push_back(
          evaluate_threshold(model, dataset, utilities, Threshold::at(th)));
    }
  }

  std::ofstream out(args.out_path);
  if (!out) throw InputError("cannot open '" + args.out_path + "'");
  const bool with_rates = !args.rates.empty();
  out << (with_rates ? "target_rate,threshold,observed_drop_rate,qor\n"
                     : "threshold,observed_drop_rate,qor\n");
  for (const auto& row : rows) {
    if (with_rates) {
      out << format_double(*row.target_rate) << ",";
      out << (row.threshold.active() ? format_double(*row.threshold.value)
                                     : "none")
          << ",";
    } else {
      out << format_double(*row.threshold.value) << ",";
    }
    out << format_double(row.observed_drop_rate) << ","
        << (row.qor ? format_double(*row.qor) : "") << "\n";
  }
  std::printf("sweep of %zu point(s) written to %s\n", rows.size(),
              args.out_path.c_str());
  return 0;
}

}  // namespace frameshed::cli
