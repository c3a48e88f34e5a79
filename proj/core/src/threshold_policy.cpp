#include "frameshed/threshold_policy.hpp"

#include <algorithm>

#include "frameshed/errors.hpp"

namespace frameshed {

UtilityHistory::UtilityHistory(std::size_t capacity, HistorySeed seeded_from)
    : capacity_(capacity), seeded_from_(seeded_from) {
  if (capacity_ == 0) throw ConfigError("history capacity must be positive");
}

void UtilityHistory::push(double utility) {
  if (!(utility >= 0.0 && utility <= 1.0)) {
    throw InputError("utility outside [0,1]");
  }
  if (window_.size() == capacity_) window_.pop_front();
  window_.push_back(utility);
}

void UtilityHistory::seed(std::span<const double> utilities, HistorySeed source) {
  window_.clear();
  seeded_from_ = source;
  for (double u : utilities) push(u);
}

double UtilityCdf::at(double u) const {
  // steps_ is ascending in utility; find the last step <= u.
  auto it = std::upper_bound(
      steps_.begin(), steps_.end(), u,
      [](double value, const Step& s) { return value < s.utility; });
  if (it == steps_.begin()) return 0.0;
  return std::prev(it)->cumulative;
}

UtilityCdf build_cdf(std::span<const double> utilities) {
  if (utilities.empty()) {
    throw InputError("cannot build a CDF from an empty history");
  }
  std::vector<double> sorted(utilities.begin(), utilities.end());
  std::sort(sorted.begin(), sorted.end());

  UtilityCdf cdf;
  cdf.sample_count_ = sorted.size();
  const double n = static_cast<double>(sorted.size());
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    cdf.steps_.push_back({sorted[i], static_cast<double>(j + 1) / n});
    i = j + 1;
  }
  return cdf;
}

UtilityCdf build_cdf(const UtilityHistory& history) {
  if (history.empty()) {
    throw InputError("cannot build a CDF from an empty history");
  }
  std::vector<double> values(history.values().begin(), history.values().end());
  return build_cdf(std::span<const double>(values));
}

Threshold threshold_for_drop_rate(const UtilityCdf& cdf, double target_rate) {
  if (!(target_rate >= 0.0 && target_rate <= 1.0)) {
    throw InputError("target drop rate outside [0,1]");
  }
  if (target_rate == 0.0) return Threshold::shed_none();
  for (const auto& step : cdf.steps()) {
    if (step.cumulative >= target_rate) return Threshold::at(step.utility);
  }
  // c_k = 1 for a non-empty history, so the loop always returns.
  return Threshold::at(cdf.steps().back().utility);
}

}  // namespace frameshed
