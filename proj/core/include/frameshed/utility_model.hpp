#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frameshed/color_features.hpp"

namespace frameshed {

struct LabeledFrame {
  FrameFeatures features;
  int label = 0;  // 1 = contains a target object of the color being trained
  std::int64_t frame_id = 0;
  std::int32_t camera_id = 0;
};

// Trained correlation model for one color: per-bin average pixel fraction
// over positive (m_pos) and negative (m_neg) training frames. Only m_pos
// enters scoring; m_neg is kept for diagnostics and reports.
struct ColorModel {
  std::string color_name;
  HueRange range;
  BinGrid grid;
  BinMatrix m_pos;
  BinMatrix m_neg;
  double norm = 0.0;  // max raw utility over the training set
  std::int64_t n_pos = 0;
  std::int64_t n_neg = 0;
};

// Boolean color query: a single color, or an OR/AND combination.
class QueryExpr {
 public:
  enum class Kind { kColor, kOr, kAnd };

  struct Node {
    Kind kind = Kind::kColor;
    std::string color;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
  };

  QueryExpr() = default;

  static QueryExpr color(std::string name);
  static QueryExpr or_of(QueryExpr lhs, QueryExpr rhs);
  static QueryExpr and_of(QueryExpr lhs, QueryExpr rhs);

  // Grammar: expr := term ('|' term)*; term := atom ('&' atom)*;
  // atom := color-name | '(' expr ')'. Example: "red|yellow".
  static QueryExpr parse(std::string_view text);

  std::string to_string() const;
  // Unique color names referenced, sorted.
  std::vector<std::string> colors() const;
  const Node* root() const { return root_.get(); }
  bool empty() const { return root_ == nullptr; }

 private:
  explicit QueryExpr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

struct UtilityModel {
  BinGrid grid;
  std::map<std::string, ColorModel> colors;
  QueryExpr query;
  std::string version = "1";
  // Query-level utilities of the training frames, in dataset order; used to
  // seed the runtime utility history before any frames have been observed.
  std::vector<double> training_utilities;
};

// Averages per-bin pixel fractions over positive and negative frames and
// records the normalization constant. Throws TrainingError when the dataset
// has no positive frame for the color; a missing negative side only leaves
// m_neg at zero.
ColorModel train_color_model(std::span<const LabeledFrame> dataset,
                             const NamedColor& color, const BinGrid& grid);

// Weighted sum m_pos[i][j] * pf[i][j]. Throws ConfigError when the features
// were extracted on a different grid or lack the model's color.
double raw_utility(const ColorModel& model, const FrameFeatures& features);

// raw_utility / norm, clamped to [0,1]; 0 when norm is 0.
double normalized_utility(const ColorModel& model, const FrameFeatures& features);

// Evaluates the query over normalized per-color utilities: OR takes the max,
// AND the min. Result is in [0,1].
double query_utility(const UtilityModel& model, const FrameFeatures& features);

// Checks that every color referenced by the query has a trained ColorModel
// on the model's grid. Throws ConfigError otherwise.
void validate_model(const UtilityModel& model);

}  // namespace frameshed
