#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "frameshed/threshold_policy.hpp"

namespace frameshed {

enum class ShedDecision {
  kForwarded,
  kShedThreshold,
  kShedQueueEviction,
  kShedResize,
  kShedDeadline,  // latency-avoidance: deadline unreachable at dispatch time
};

const char* to_string(ShedDecision d);

struct FrameTicket {
  std::int64_t frame_id = 0;
  std::int32_t camera_id = 0;
  double arrival_ts_ms = 0.0;
  double deadline_ms = 0.0;  // generation_ts + latency bound
  double utility = 0.0;
  std::uint64_t seq = 0;  // admission order, assigned by the shedder
};

// One sealed per-frame outcome. A frame gets exactly one event: at
// admission for threshold sheds, at eviction, or at dispatch.
struct ShedEvent {
  std::int64_t frame_id = 0;
  std::int32_t camera_id = 0;
  double utility = 0.0;
  ShedDecision decision = ShedDecision::kForwarded;
  std::optional<double> threshold;  // active threshold when decided
  double ts_ms = 0.0;
};

struct ShedderStats {
  std::int64_t ingress = 0;
  std::int64_t forwarded = 0;
  std::int64_t shed_threshold = 0;
  std::int64_t shed_queue_eviction = 0;
  std::int64_t shed_resize = 0;
  std::int64_t shed_deadline = 0;
  std::int64_t rejected = 0;  // malformed utility, no decision recorded
  std::int64_t resize_clamped = 0;

  std::int64_t total_shed() const {
    return shed_threshold + shed_queue_eviction + shed_resize + shed_deadline;
  }
};

// Load shedder dataplane: admission control by utility threshold, a bounded
// utility-ordered queue, and token-based dispatch to the backend. All calls
// are made from one owning task; no internal locking.
class LoadShedder {
 public:
  struct Config {
    std::size_t capacity = 1;
    int max_tokens = 1;
  };

  struct IngressFrame {
    std::int64_t frame_id = 0;
    std::int32_t camera_id = 0;
    double arrival_ts_ms = 0.0;
    double deadline_ms = 0.0;
    double utility = 0.0;
  };

  explicit LoadShedder(Config cfg);

  // Admission: threshold check, queue insert with lowest-utility eviction,
  // then immediate dispatch while tokens are available. Returns the frames
  // dispatched by this call (usually 0 or 1).
  std::vector<FrameTicket> on_frame(const IngressFrame& frame, double now_ms);

  // Backend completed a frame: return its token and dispatch the
  // highest-utility queued frame (ties go to the oldest).
  std::vector<FrameTicket> on_token_freed(double now_ms);

  // Shrinking evicts lowest-utility residents (ties oldest-first) until the
  // queue fits. Capacities below 1 are clamped to 1. Returns the evictions.
  std::vector<FrameTicket> resize_queue(std::size_t new_capacity, double now_ms);

  // Content-agnostic admission drop (random baseline); logged as a
  // threshold shed.
  void drop_at_admission(const IngressFrame& frame, double now_ms);

  // Applies to frames arriving after the call; residents are not re-checked.
  void set_threshold(Threshold t) { threshold_ = t; }
  // Expected dispatch-to-completion cost used by the deadline guard.
  // 0 (default) degenerates to a plain now > deadline check.
  void set_dispatch_cost_ms(double cost_ms) { dispatch_cost_ms_ = cost_ms; }

  Threshold threshold() const { return threshold_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t queue_size() const { return queue_.size(); }
  int tokens() const { return tokens_; }
  const ShedderStats& stats() const { return stats_; }
  const std::vector<ShedEvent>& events() const { return events_; }

 private:
  struct Entry {
    double utility;
    std::uint64_t seq;
    FrameTicket ticket;
  };
  struct MinOrder {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.utility != b.utility) return a.utility < b.utility;
      return a.seq < b.seq;
    }
  };

  std::vector<FrameTicket> try_dispatch(double now_ms);
  void emit(const FrameTicket& t, ShedDecision d, double now_ms);

  std::size_t capacity_;
  int max_tokens_;
  int tokens_;
  Threshold threshold_;
  double dispatch_cost_ms_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::multiset<Entry, MinOrder> queue_;
  ShedderStats stats_;
  std::vector<ShedEvent> events_;
};

}  // namespace frameshed
