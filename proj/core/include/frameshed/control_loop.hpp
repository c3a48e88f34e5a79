#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "frameshed/threshold_policy.hpp"

namespace frameshed {

// Monitored latency terms feeding the control arithmetic. proc_q_ms is the
// average backend per-frame processing latency; the other terms are the
// fixed camera-side and network costs of the deployment.
struct LatencyEstimates {
  double proc_q_ms = 0.0;
  double net_cam_ls_ms = 0.0;
  double net_ls_q_ms = 0.0;
  double proc_cam_ms = 0.0;
  double fps_in = 0.0;
};

enum class ProcEstimator { kEwma, kWindowMean };

struct ControlConfig {
  double latency_bound_ms = 1000.0;
  double update_period_ms = 1000.0;
  ProcEstimator estimator = ProcEstimator::kEwma;
  double ewma_alpha = 0.2;
  // When true, per-frame samples include backend queuing time on top of
  // operator execution time. Default is exec-only to avoid feeding the
  // backlog the loop itself creates back into the throughput estimate.
  bool proc_includes_backend_queue = false;
};

// Currently supported backend throughput in frames/sec: 1000 / proc_q_ms.
// Throws InputError before any latency has been measured (proc_q_ms <= 0).
double supported_throughput(const LatencyEstimates& est);

// Fraction of ingress that must be dropped: max(0, 1 - st/fps_in).
// Returns 0 for an idle stream (fps_in <= 0).
double target_drop_rate(double st_fps, double fps_in);

// Largest queue size whose expected end-to-end latency stays within the
// bound: max(1, floor((LB - fixed_costs) / proc_q)). Never below 1, so the
// downstream operators are not starved. Throws InputError when proc_q <= 0.
int queue_capacity(const LatencyEstimates& est, const ControlConfig& cfg);

struct ControlRecord {
  double t_ms = 0.0;
  double proc_q_ms = 0.0;
  double fps_in = 0.0;
  double st_fps = 0.0;
  double target_drop_rate = 0.0;
  Threshold threshold;
  int capacity = 1;
};

struct ControlUpdate {
  Threshold threshold;
  int capacity = 1;
  // Expected cost between dispatch and completion (net_ls_q + proc_q
  // estimate); the shedder drops frames whose deadline cannot absorb it.
  double dispatch_cost_ms = 0.0;
};

// Periodic feedback loop: consumes completed-frame latency samples and
// ingress utilities, produces threshold/capacity updates for the shedder.
// Single-writer; tick() is called from the pipeline's event loop.
class ControlLoop {
 public:
  ControlLoop(ControlConfig cfg, double net_cam_ls_ms, double net_ls_q_ms,
              double proc_cam_ms, std::size_t history_capacity = 2000);

  void seed_history(std::span<const double> utilities);
  void on_ingress(double now_ms, double utility);
  void on_completion(double now_ms, double exec_ms, double queue_plus_exec_ms);

  // No-op (returns nullopt) until the first completion sample exists.
  std::optional<ControlUpdate> on_tick(double now_ms);

  const std::vector<ControlRecord>& log() const { return log_; }
  const ControlConfig& config() const { return cfg_; }
  const UtilityHistory& history() const { return history_; }
  std::optional<double> proc_q_estimate() const;

 private:
  ControlConfig cfg_;
  double net_cam_ls_ms_;
  double net_ls_q_ms_;
  double proc_cam_ms_;

  UtilityHistory history_;
  std::optional<double> ewma_;
  std::optional<double> window_mean_;
  std::optional<double> last_sample_;
  std::vector<double> window_samples_;
  std::int64_t window_ingress_ = 0;

  Threshold threshold_;
  int capacity_ = 1;
  std::vector<ControlRecord> log_;
};

}  // namespace frameshed
