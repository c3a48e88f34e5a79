#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace frameshed {

// Utility cut for the shedder: frames with utility <= value are dropped.
// An empty value means no shedding at all.
struct Threshold {
  std::optional<double> value;

  static Threshold shed_none() { return Threshold{}; }
  static Threshold at(double v) { return Threshold{v}; }
  bool active() const { return value.has_value(); }
  bool sheds(double utility) const { return value && utility <= *value; }
  bool operator==(const Threshold&) const = default;
};

enum class HistorySeed { kTrainingSet, kRuntime };

// Bounded FIFO of recently observed frame utilities.
class UtilityHistory {
 public:
  explicit UtilityHistory(std::size_t capacity = 2000,
                          HistorySeed seeded_from = HistorySeed::kRuntime);

  // FIFO append with eviction at capacity. Throws InputError for values
  // outside [0,1].
  void push(double utility);
  void seed(std::span<const double> utilities, HistorySeed source);

  std::size_t size() const { return window_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return window_.empty(); }
  HistorySeed seeded_from() const { return seeded_from_; }
  const std::deque<double>& values() const { return window_; }

 private:
  std::size_t capacity_;
  HistorySeed seeded_from_;
  std::deque<double> window_;
};

// Step-function empirical CDF over a utility history: at each distinct
// utility u, the fraction of history values <= u.
class UtilityCdf {
 public:
  struct Step {
    double utility;
    double cumulative;  // fraction of history <= utility
  };

  const std::vector<Step>& steps() const { return steps_; }
  std::size_t sample_count() const { return sample_count_; }

  // Fraction of history values <= u.
  double at(double u) const;

  friend UtilityCdf build_cdf(const UtilityHistory& history);
  friend UtilityCdf build_cdf(std::span<const double> utilities);

 private:
  std::vector<Step> steps_;
  std::size_t sample_count_ = 0;
};

// Throws InputError on an empty history; callers fall back to a
// training-set seed in that case.
UtilityCdf build_cdf(const UtilityHistory& history);
UtilityCdf build_cdf(std::span<const double> utilities);

// Smallest step value u with CDF(u) >= r; shed_none when r == 0.
// Throws InputError for r outside [0,1].
Threshold threshold_for_drop_rate(const UtilityCdf& cdf, double target_rate);

}  // namespace frameshed
