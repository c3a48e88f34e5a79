#include "frameshed/shedder.hpp"

#include <cmath>

#include "frameshed/errors.hpp"

namespace frameshed {

const char* to_string(ShedDecision d) {
  switch (d) {
    case ShedDecision::kForwarded: return "forwarded";
    case ShedDecision::kShedThreshold: return "shed_threshold";
    case ShedDecision::kShedQueueEviction: return "shed_queue_eviction";
    case ShedDecision::kShedResize: return "shed_resize";
    case ShedDecision::kShedDeadline: return "shed_deadline";
  }
  return "unknown";
}

LoadShedder::LoadShedder(Config cfg)
    : capacity_(cfg.capacity), max_tokens_(cfg.max_tokens), tokens_(cfg.max_tokens) {
  if (capacity_ < 1) throw ConfigError("shedder queue capacity must be >= 1");
  if (max_tokens_ < 1) throw ConfigError("max tokens must be >= 1");
}

void LoadShedder::emit(const FrameTicket& t, ShedDecision d, double now_ms) {
  events_.push_back(
      {t.frame_id, t.camera_id, t.utility, d, threshold_.value, now_ms});
}

std::vector<FrameTicket> LoadShedder::try_dispatch(double now_ms) {
  std::vector<FrameTicket> dispatched;
  while (tokens_ > 0 && !queue_.empty()) {
    // Oldest entry within the highest-utility group.
    const double max_utility = std::prev(queue_.end())->utility;
    auto it = queue_.lower_bound(Entry{max_utility, 0, {}});
    FrameTicket ticket = it->ticket;
    queue_.erase(it);
    if (now_ms + dispatch_cost_ms_ > ticket.deadline_ms) {
      ++stats_.shed_deadline;
      emit(ticket, ShedDecision::kShedDeadline, now_ms);
      continue;  // token retained, try the next best frame
    }
    --tokens_;
    ++stats_.forwarded;
    emit(ticket, ShedDecision::kForwarded, now_ms);
    dispatched.push_back(ticket);
  }
  return dispatched;
}

std::vector<FrameTicket> LoadShedder::on_frame(const IngressFrame& frame,
                                               double now_ms) {
  ++stats_.ingress;
  if (std::isnan(frame.utility) || frame.utility < 0.0 || frame.utility > 1.0) {
    ++stats_.rejected;
    return {};
  }
  if (threshold_.sheds(frame.utility)) {
    ++stats_.shed_threshold;
    emit({frame.frame_id, frame.camera_id, frame.arrival_ts_ms,
          frame.deadline_ms, frame.utility, 0},
         ShedDecision::kShedThreshold, now_ms);
    return {};
  }

  const std::uint64_t seq = next_seq_++;
  FrameTicket ticket{frame.frame_id, frame.camera_id, frame.arrival_ts_ms,
                     frame.deadline_ms, frame.utility, seq};
  queue_.insert(Entry{ticket.utility, seq, ticket});

  if (queue_.size() > capacity_) {
    auto victim = queue_.begin();  // lowest utility, oldest among ties
    const bool victim_is_new = victim->seq == seq;
    ++stats_.shed_queue_eviction;
    emit(victim->ticket, ShedDecision::kShedQueueEviction, now_ms);
    queue_.erase(victim);
    if (victim_is_new) return {};
  }
  return try_dispatch(now_ms);
}

std::vector<FrameTicket> LoadShedder::on_token_freed(double now_ms) {
  if (tokens_ < max_tokens_) ++tokens_;
  return try_dispatch(now_ms);
}

std::vector<FrameTicket> LoadShedder::resize_queue(std::size_t new_capacity,
                                                   double now_ms) {
  if (new_capacity < 1) {
    new_capacity = 1;
    ++stats_.resize_clamped;
  }
  capacity_ = new_capacity;
  std::vector<FrameTicket> evicted;
  while (queue_.size() > capacity_) {
    auto victim = queue_.begin();
    ++stats_.shed_resize;
    emit(victim->ticket, ShedDecision::kShedResize, now_ms);
    evicted.push_back(victim->ticket);
    queue_.erase(victim);
  }
  return evicted;
}

void LoadShedder::drop_at_admission(const IngressFrame& frame, double now_ms) {
  ++stats_.ingress;
  ++stats_.shed_threshold;
  emit({frame.frame_id, frame.camera_id, frame.arrival_ts_ms, frame.deadline_ms,
        frame.utility, 0},
       ShedDecision::kShedThreshold, now_ms);
}

}  // namespace frameshed
