#include "frameshed/trainer.hpp"

#include <algorithm>

#include "frameshed/errors.hpp"

namespace frameshed {

UtilityModel train_utility_model(std::span<const FrameRecord> dataset,
                                 const std::vector<NamedColor>& colors,
                                 const QueryExpr& query,
                                 const TrainOptions& options) {
  if (dataset.empty()) throw TrainingError("training dataset is empty");

  std::vector<NamedColor> query_colors;
  for (const auto& name : query.colors()) {
    auto it = std::find_if(colors.begin(), colors.end(),
                           [&](const NamedColor& c) { return c.name == name; });
    if (it == colors.end()) {
      throw ConfigError("query color '" + name + "' is not in the colors config");
    }
    query_colors.push_back(*it);
  }

  std::vector<FrameFeatures> features;
  features.reserve(dataset.size());
  for (const auto& fr : dataset) {
    features.push_back(extract_features(fr.hist, query_colors, options.grid));
  }

  UtilityModel model;
  model.grid = options.grid;
  model.query = query;
  for (const auto& color : query_colors) {
    std::vector<LabeledFrame> labeled;
    labeled.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const bool positive = std::any_of(
          dataset[i].objects.begin(), dataset[i].objects.end(),
          [&](const GroundTruthObject& o) { return o.color == color.name; });
      labeled.push_back({features[i], positive ? 1 : 0, dataset[i].frame_id,
                         dataset[i].camera_id});
    }
    model.colors.emplace(color.name,
                         train_color_model(labeled, color, options.grid));
  }
  validate_model(model);

  if (options.store_training_utilities) {
    model.training_utilities.reserve(dataset.size());
    for (const auto& f : features) {
      model.training_utilities.push_back(query_utility(model, f));
    }
  }
  return model;
}

}  // namespace frameshed
