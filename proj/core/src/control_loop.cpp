#include "frameshed/control_loop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "frameshed/errors.hpp"

namespace frameshed {

double supported_throughput(const LatencyEstimates& est) {
  if (!(est.proc_q_ms > 0.0)) {
    throw InputError("backend processing latency not yet measured");
  }
  return 1000.0 / est.proc_q_ms;
}

double target_drop_rate(double st_fps, double fps_in) {
  if (!(fps_in > 0.0)) return 0.0;
  return std::max(0.0, 1.0 - st_fps / fps_in);
}

int queue_capacity(const LatencyEstimates& est, const ControlConfig& cfg) {
  if (!(est.proc_q_ms > 0.0)) {
    throw InputError("backend processing latency not yet measured");
  }
  const double fixed =
      est.net_cam_ls_ms + est.net_ls_q_ms + est.proc_cam_ms;
  const double slack = cfg.latency_bound_ms - fixed;
  if (slack < est.proc_q_ms) return 1;
  return std::max(1, static_cast<int>(std::floor(slack / est.proc_q_ms)));
}

ControlLoop::ControlLoop(ControlConfig cfg, double net_cam_ls_ms,
                         double net_ls_q_ms, double proc_cam_ms,
                         std::size_t history_capacity)
    : cfg_(cfg),
      net_cam_ls_ms_(net_cam_ls_ms),
      net_ls_q_ms_(net_ls_q_ms),
      proc_cam_ms_(proc_cam_ms),
      history_(history_capacity) {
  if (cfg_.update_period_ms <= 0.0) {
    throw ConfigError("control update period must be positive");
  }
  if (cfg_.latency_bound_ms <= net_cam_ls_ms_ + net_ls_q_ms_ + proc_cam_ms_) {
    throw ConfigError("latency bound must exceed fixed network/camera costs");
  }
  if (cfg_.ewma_alpha <= 0.0 || cfg_.ewma_alpha > 1.0) {
    throw ConfigError("ewma alpha must be in (0,1]");
  }
}

void ControlLoop::seed_history(std::span<const double> utilities) {
  history_.seed(utilities, HistorySeed::kTrainingSet);
}

void ControlLoop::on_ingress(double /*now_ms*/, double utility) {
  ++window_ingress_;
  history_.push(utility);
}

void ControlLoop::on_completion(double /*now_ms*/, double exec_ms,
                                double queue_plus_exec_ms) {
  const double sample =
      cfg_.proc_includes_backend_queue ? queue_plus_exec_ms : exec_ms;
  ewma_ = ewma_ ? cfg_.ewma_alpha * sample + (1.0 - cfg_.ewma_alpha) * *ewma_
                : sample;
  window_samples_.push_back(sample);
  last_sample_ = sample;
}

std::optional<double> ControlLoop::proc_q_estimate() const {
  if (cfg_.estimator == ProcEstimator::kEwma) return ewma_;
  return window_mean_;
}

std::optional<ControlUpdate> ControlLoop::on_tick(double now_ms) {
  if (!window_samples_.empty()) {
    window_mean_ = std::accumulate(window_samples_.begin(),
                                   window_samples_.end(), 0.0) /
                   static_cast<double>(window_samples_.size());
  }
  const std::int64_t ingress = window_ingress_;
  window_ingress_ = 0;
  window_samples_.clear();

  const auto estimate = proc_q_estimate();
  if (!estimate) return std::nullopt;  // no completed frame yet

  const double fps_in =
      static_cast<double>(ingress) * 1000.0 / cfg_.update_period_ms;
  LatencyEstimates est{*estimate, net_cam_ls_ms_, net_ls_q_ms_, proc_cam_ms_,
                       fps_in};
  const double st = supported_throughput(est);
  const double rate = target_drop_rate(st, fps_in);
  capacity_ = queue_capacity(est, cfg_);

  if (rate == 0.0) {
    threshold_ = Threshold::shed_none();
  } else if (!history_.empty()) {
    threshold_ = threshold_for_drop_rate(build_cdf(history_), rate);
  }
  // else: hold the previous threshold until utilities are observed.

  log_.push_back({now_ms, *estimate, fps_in, st, rate, threshold_, capacity_});

  ControlUpdate update;
  update.threshold = threshold_;
  update.capacity = capacity_;
  update.dispatch_cost_ms =
      net_ls_q_ms_ + std::max(*estimate, last_sample_.value_or(*estimate));
  return update;
}

}  // namespace frameshed
