#include "frameshed/utility_model.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "frameshed/errors.hpp"

namespace frameshed {

QueryExpr QueryExpr::color(std::string name) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kColor;
  node->color = std::move(name);
  return QueryExpr(std::move(node));
}

QueryExpr QueryExpr::or_of(QueryExpr lhs, QueryExpr rhs) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kOr;
  node->left = std::move(lhs.root_);
  node->right = std::move(rhs.root_);
  return QueryExpr(std::move(node));
}

QueryExpr QueryExpr::and_of(QueryExpr lhs, QueryExpr rhs) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kAnd;
  node->left = std::move(lhs.root_);
  node->right = std::move(rhs.root_);
  return QueryExpr(std::move(node));
}

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw ConfigError("query parse error at offset " + std::to_string(pos) +
                      ": " + what);
  }

  QueryExpr parse_expr() {
    QueryExpr lhs = parse_term();
    while (eat('|')) lhs = QueryExpr::or_of(std::move(lhs), parse_term());
    return lhs;
  }

  QueryExpr parse_term() {
    QueryExpr lhs = parse_atom();
    while (eat('&')) lhs = QueryExpr::and_of(std::move(lhs), parse_atom());
    return lhs;
  }

  QueryExpr parse_atom() {
    skip_ws();
    if (eat('(')) {
      QueryExpr inner = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    const std::size_t start = pos;
    while (pos < text.size()) {
      const char c = text[pos];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
        ++pos;
      } else {
        break;
      }
    }
    if (pos == start) fail("expected color name");
    return QueryExpr::color(std::string(text.substr(start, pos - start)));
  }
};

void collect_colors(const QueryExpr::Node* node, std::set<std::string>& out) {
  if (node == nullptr) return;
  if (node->kind == QueryExpr::Kind::kColor) {
    out.insert(node->color);
    return;
  }
  collect_colors(node->left.get(), out);
  collect_colors(node->right.get(), out);
}

std::string node_to_string(const QueryExpr::Node* node, bool parenthesize) {
  if (node == nullptr) return "";
  if (node->kind == QueryExpr::Kind::kColor) return node->color;
  const char op = node->kind == QueryExpr::Kind::kOr ? '|' : '&';
  // Parenthesize OR under AND so the string reparses to the same tree.
  const bool left_paren = node->kind == QueryExpr::Kind::kAnd &&
                          node->left->kind == QueryExpr::Kind::kOr;
  const bool right_paren = node->kind == QueryExpr::Kind::kAnd &&
                           node->right->kind == QueryExpr::Kind::kOr;
  std::string s = node_to_string(node->left.get(), left_paren);
  if (left_paren) s = "(" + s + ")";
  std::string r = node_to_string(node->right.get(), right_paren);
  if (right_paren) r = "(" + r + ")";
  std::string out = s + op + r;
  (void)parenthesize;
  return out;
}

}  // namespace

QueryExpr QueryExpr::parse(std::string_view text) {
  Parser p{text};
  QueryExpr expr = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return expr;
}

std::string QueryExpr::to_string() const {
  return node_to_string(root_.get(), false);
}

std::vector<std::string> QueryExpr::colors() const {
  std::set<std::string> set;
  collect_colors(root_.get(), set);
  return {set.begin(), set.end()};
}

namespace {

const ColorFeature& feature_for(const ColorModel& model,
                                const FrameFeatures& features) {
  auto it = features.per_color.find(model.color_name);
  if (it == features.per_color.end()) {
    throw ConfigError("features carry no color '" + model.color_name + "'");
  }
  const ColorFeature& feat = it->second;
  if (feat.pf.n_sat != model.grid.n_sat_bins() ||
      feat.pf.n_val != model.grid.n_val_bins()) {
    throw ConfigError("features for color '" + model.color_name +
                      "' use a different bin grid than the model");
  }
  return feat;
}

}  // namespace

ColorModel train_color_model(std::span<const LabeledFrame> dataset,
                             const NamedColor& color, const BinGrid& grid) {
  ColorModel model;
  model.color_name = color.name;
  model.range = color.range;
  model.grid = grid;
  model.m_pos.n_sat = grid.n_sat_bins();
  model.m_pos.n_val = grid.n_val_bins();
  model.m_pos.values.assign(static_cast<std::size_t>(grid.n_bins()), 0.0);
  model.m_neg = model.m_pos;

  for (const auto& frame : dataset) {
    const ColorFeature& feat = feature_for(model, frame.features);
    BinMatrix& target = frame.label == 1 ? model.m_pos : model.m_neg;
    for (std::size_t k = 0; k < target.values.size(); ++k) {
      target.values[k] += feat.pf.values[k];
    }
    if (frame.label == 1) {
      ++model.n_pos;
    } else {
      ++model.n_neg;
    }
  }
  if (model.n_pos == 0) {
    throw TrainingError("no positive examples for color '" + color.name + "'");
  }
  for (auto& v : model.m_pos.values) v /= static_cast<double>(model.n_pos);
  if (model.n_neg > 0) {
    for (auto& v : model.m_neg.values) v /= static_cast<double>(model.n_neg);
  }

  double max_raw = 0.0;
  for (const auto& frame : dataset) {
    max_raw = std::max(max_raw, raw_utility(model, frame.features));
  }
  model.norm = max_raw;
  return model;
}

double raw_utility(const ColorModel& model, const FrameFeatures& features) {
  const ColorFeature& feat = feature_for(model, features);
  double sum = 0.0;
  for (std::size_t k = 0; k < feat.pf.values.size(); ++k) {
    sum += model.m_pos.values[k] * feat.pf.values[k];
  }
  return sum;
}

double normalized_utility(const ColorModel& model,
                          const FrameFeatures& features) {
  if (model.norm <= 0.0) return 0.0;
  const double u = raw_utility(model, features) / model.norm;
  return std::clamp(u, 0.0, 1.0);
}

namespace {

double eval_node(const UtilityModel& model, const QueryExpr::Node* node,
                 const FrameFeatures& features) {
  if (node == nullptr) throw ConfigError("empty query expression");
  if (node->kind == QueryExpr::Kind::kColor) {
    auto it = model.colors.find(node->color);
    if (it == model.colors.end()) {
      throw ConfigError("query references untrained color '" + node->color + "'");
    }
    return normalized_utility(it->second, features);
  }
  const double lhs = eval_node(model, node->left.get(), features);
  const double rhs = eval_node(model, node->right.get(), features);
  return node->kind == QueryExpr::Kind::kOr ? std::max(lhs, rhs)
                                            : std::min(lhs, rhs);
}

}  // namespace

double query_utility(const UtilityModel& model, const FrameFeatures& features) {
  return eval_node(model, model.query.root(), features);
}

void validate_model(const UtilityModel& model) {
  if (model.query.empty()) throw ConfigError("model has no query expression");
  for (const auto& name : model.query.colors()) {
    auto it = model.colors.find(name);
    if (it == model.colors.end()) {
      throw ConfigError("query references untrained color '" + name + "'");
    }
    if (it->second.grid != model.grid) {
      throw ConfigError("color model '" + name +
                        "' trained on a different grid than the model");
    }
  }
}

}  // namespace frameshed
