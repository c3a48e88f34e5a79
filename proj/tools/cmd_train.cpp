#include <cstdio>

#include "commands.hpp"
#include "frameshed/io.hpp"
#include "frameshed/trainer.hpp"
#include "util.hpp"

namespace frameshed::cli {

int cmd_train(const TrainArgs& args) {
  const auto colors = load_colors_config(args.colors_path);
  const auto query = QueryExpr::parse(args.query);
  const auto dataset = load_merged_datasets(args.datasets);

  TrainOptions options;
  options.grid = parse_grid(args.grid);
  auto model = train_utility_model(dataset, colors, query, options);

  save_model(args.out_path, model);
  write_model_summary(args.out_path, model);

  std::printf("trained %zu color model(s) on %zu frames\n", model.colors.size(),
              dataset.size());
  for (const auto& [name, cm] : model.colors) {
    std::printf("  %s: n_pos=%lld n_neg=%lld norm=%s\n", name.c_str(),
                static_cast<long long>(cm.n_pos),
                static_cast<long long>(cm.n_neg),
                format_double(cm.norm).c_str());
  }
  std::printf("model written to %s (hash %s)\n", args.out_path.c_str(),
              model_content_hash(model).c_str());
  return 0;
}

}  // namespace frameshed::cli
