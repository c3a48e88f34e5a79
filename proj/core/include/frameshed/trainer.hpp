#pragma once

#include <span>
#include <vector>

#include "frameshed/sim.hpp"
#include "frameshed/utility_model.hpp"

namespace frameshed {

struct TrainOptions {
  BinGrid grid;
  bool store_training_utilities = true;
};

// Trains one ColorModel per color referenced by the query. A frame is a
// positive for a color when its ground truth contains at least one object of
// that color. Throws TrainingError when a query color has no positives and
// ConfigError when a query color is missing from the colors config.
UtilityModel train_utility_model(std::span<const FrameRecord> dataset,
                                 const std::vector<NamedColor>& colors,
                                 const QueryExpr& query,
                                 const TrainOptions& options = {});

}  // namespace frameshed
