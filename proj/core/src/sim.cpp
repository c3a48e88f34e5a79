#include "frameshed/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include "frameshed/errors.hpp"
#include "frameshed/rng.hpp"

namespace frameshed {

double LatencySpec::sample(Rng& rng) const {
  switch (kind) {
    case Kind::kConstant:
      return a;
    case Kind::kUniform:
      return rng.uniform(a, b);
    case Kind::kNormal:
      return std::max(0.0, rng.normal(a, b));
  }
  return a;
}

std::vector<OperatorProfile> default_operator_chain(double dnn_ms) {
  return {
      {"blob_filter", LatencySpec::constant(2.0), PassRule::kBlobFlag},
      {"color_filter", LatencySpec::constant(3.0), PassRule::kColorFlag},
      {"dnn", LatencySpec::constant(dnn_ms), PassRule::kAll},
      {"sink", LatencySpec::constant(1.0), PassRule::kAll},
  };
}

std::vector<FrameRecord> interleave_cameras(
    std::vector<std::vector<FrameRecord>> streams) {
  for (const auto& s : streams) {
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i].generation_ts_ms < s[i - 1].generation_ts_ms) {
        throw InputError("camera stream is not timestamp-ordered");
      }
    }
  }
  std::vector<FrameRecord> merged;
  std::size_t total = 0;
  for (const auto& s : streams) total += s.size();
  merged.reserve(total);
  for (auto& s : streams) {
    for (auto& f : s) merged.push_back(std::move(f));
  }
  std::stable_sort(merged.begin(), merged.end(),
                   [](const FrameRecord& a, const FrameRecord& b) {
                     if (a.generation_ts_ms != b.generation_ts_ms) {
                       return a.generation_ts_ms < b.generation_ts_ms;
                     }
                     return a.camera_id < b.camera_id;
                   });
  std::set<std::int64_t> ids;
  for (const auto& f : merged) {
    if (!ids.insert(f.frame_id).second) {
      throw InputError("duplicate frame id " + std::to_string(f.frame_id) +
                       " across camera streams");
    }
  }
  return merged;
}

double per_object_qor(const ForwardedMap& forwarded,
                      std::span<const FrameRecord> dataset,
                      std::int64_t object_id) {
  std::int64_t containing = 0;
  std::int64_t kept = 0;
  for (const auto& fr : dataset) {
    const bool has = std::any_of(
        fr.objects.begin(), fr.objects.end(),
        [&](const GroundTruthObject& o) { return o.object_id == object_id; });
    if (!has) continue;
    ++containing;
    auto it = forwarded.find(fr.frame_id);
    if (it != forwarded.end() && it->second) ++kept;
  }
  if (containing == 0) {
    throw InputError("object " + std::to_string(object_id) +
                     " does not appear in the dataset");
  }
  return static_cast<double>(kept) / static_cast<double>(containing);
}

std::optional<double> overall_qor(const ForwardedMap& forwarded,
                                  std::span<const FrameRecord> dataset,
                                  const std::vector<std::string>& target_colors) {
  std::vector<std::int64_t> objects;
  for (const auto& fr : dataset) {
    for (const auto& o : fr.objects) {
      if (std::find(target_colors.begin(), target_colors.end(), o.color) !=
          target_colors.end()) {
        objects.push_back(o.object_id);
      }
    }
  }
  std::sort(objects.begin(), objects.end());
  objects.erase(std::unique(objects.begin(), objects.end()), objects.end());
  if (objects.empty()) return std::nullopt;
  double sum = 0.0;
  for (std::int64_t id : objects) sum += per_object_qor(forwarded, dataset, id);
  return sum / static_cast<double>(objects.size());
}

namespace {

constexpr std::int64_t kBucketMs = 5000;

enum class EventKind { kArrival, kCompletion, kTick };

struct Event {
  double t = 0.0;
  std::uint64_t order = 0;
  EventKind kind = EventKind::kArrival;
  std::size_t index = 0;  // dataset index for arrival/completion

  bool operator>(const Event& other) const {
    if (t != other.t) return t > other.t;
    return order > other.order;
  }
};

struct FrameState {
  double utility = 0.0;
  double arrival_ts = 0.0;
  double dispatch_ts = 0.0;
  double backend_start = 0.0;
  double completion_ts = 0.0;
  double exec_total = 0.0;
  std::size_t exit_op = 0;
};

struct BucketAccum {
  BucketRow row;
  double e2e_sum = 0.0;
};

}  // namespace

RunReport run_simulation(const SimConfig& cfg, const UtilityModel* model,
                         std::span<const FrameRecord> dataset) {
  if (cfg.policy == ShedPolicy::kUtility && model == nullptr) {
    throw ConfigError("utility shedding requires a trained model");
  }
  if (cfg.operators.empty()) throw ConfigError("operator chain is empty");
  if (cfg.net_cam_ls_ms < 0.0 || cfg.net_ls_q_ms < 0.0 || cfg.proc_cam_ms < 0.0) {
    throw ConfigError("network and camera latencies must be non-negative");
  }
  for (const auto& op : cfg.operators) {
    const auto& spec = op.exec_latency_ms;
    const bool valid =
        (spec.kind == LatencySpec::Kind::kConstant && spec.a >= 0.0) ||
        (spec.kind == LatencySpec::Kind::kUniform && 0.0 <= spec.a &&
         spec.a <= spec.b) ||
        (spec.kind == LatencySpec::Kind::kNormal && spec.b >= 0.0);
    if (!valid) {
      throw ConfigError("operator '" + op.name + "' has an invalid latency spec");
    }
  }
  for (std::size_t i = 1; i < dataset.size(); ++i) {
    if (dataset[i].generation_ts_ms < dataset[i - 1].generation_ts_ms) {
      throw InputError("dataset is not generation-timestamp-ordered");
    }
  }

  std::vector<NamedColor> colors;
  if (model != nullptr) {
    validate_model(*model);
    for (const auto& [name, cm] : model->colors) colors.push_back({name, cm.range});
    // Fail fast on a grid/quantization mismatch instead of mid-run.
    if (!dataset.empty()) {
      extract_features(dataset.front().hist, colors, model->grid);
    }
  }

  const double lb = cfg.control.latency_bound_ms;
  const bool control_active =
      cfg.policy == ShedPolicy::kUtility;

  ControlLoop loop(cfg.control, cfg.net_cam_ls_ms, cfg.net_ls_q_ms,
                   cfg.proc_cam_ms, cfg.history_capacity);
  if (control_active && cfg.seed_history_from_model && model != nullptr &&
      !model->training_utilities.empty()) {
    loop.seed_history(model->training_utilities);
  }

  LoadShedder::Config shed_cfg;
  shed_cfg.capacity = cfg.policy == ShedPolicy::kNone
                          ? std::numeric_limits<std::size_t>::max() / 2
                          : cfg.initial_queue_capacity;
  shed_cfg.max_tokens = cfg.max_tokens;
  LoadShedder shedder(shed_cfg);

  Rng exec_rng = Rng(cfg.seed).fork(0xbacce57);
  Rng random_policy_rng = Rng(cfg.seed).fork(0x5eed);

  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> heap;
  std::uint64_t next_order = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double arrival = static_cast<double>(dataset[i].generation_ts_ms) +
                           cfg.proc_cam_ms + cfg.net_cam_ls_ms;
    heap.push({arrival, next_order++, EventKind::kArrival, i});
  }
  if (control_active) {
    heap.push({cfg.control.update_period_ms, next_order++, EventKind::kTick, 0});
  }

  std::vector<FrameState> state(dataset.size());
  std::map<std::int64_t, std::size_t> index_by_frame_id;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    index_by_frame_id[dataset[i].frame_id] = i;
  }
  if (index_by_frame_id.size() != dataset.size()) {
    throw InputError("dataset contains duplicate frame ids");
  }

  RunReport report;
  for (const auto& op : cfg.operators) report.operator_names.push_back(op.name);

  std::map<std::int64_t, BucketAccum> buckets;
  auto bucket_at = [&](double t) -> BucketAccum& {
    const auto start =
        static_cast<std::int64_t>(std::floor(t / kBucketMs)) * kBucketMs;
    auto& acc = buckets[start];
    acc.row.bucket_start_ms = start;
    acc.row.stage_counts.resize(cfg.operators.size(), 0);
    return acc;
  };

  double backend_free_at = 0.0;
  std::size_t arrivals_left = dataset.size();

  auto start_backend = [&](const FrameTicket& ticket, double dispatch_ts) {
    const std::size_t idx = index_by_frame_id.at(ticket.frame_id);
    const FrameRecord& fr = dataset[idx];
    FrameState& st = state[idx];
    st.dispatch_ts = dispatch_ts;
    const double backend_arrival = dispatch_ts + cfg.net_ls_q_ms;
    st.backend_start = std::max(backend_arrival, backend_free_at);

    double exec = 0.0;
    std::size_t exit_op = 0;
    for (std::size_t k = 0; k < cfg.operators.size(); ++k) {
      const auto& op = cfg.operators[k];
      exec += op.exec_latency_ms.sample(exec_rng);
      exit_op = k;
      auto& acc = bucket_at(st.backend_start);
      ++acc.row.stage_counts[k];
      const bool passes = op.pass_rule == PassRule::kAll ||
                          (op.pass_rule == PassRule::kBlobFlag &&
                           fr.stage_flags.passes_blob_filter) ||
                          (op.pass_rule == PassRule::kColorFlag &&
                           fr.stage_flags.passes_color_filter);
      if (!passes) break;
    }
    st.exec_total = exec;
    st.exit_op = exit_op;
    st.completion_ts = st.backend_start + exec;
    backend_free_at = st.completion_ts;
    heap.push({st.completion_ts, next_order++, EventKind::kCompletion, idx});
  };

  while (!heap.empty()) {
    const Event ev = heap.top();
    heap.pop();
    switch (ev.kind) {
      case EventKind::kArrival: {
        --arrivals_left;
        const FrameRecord& fr = dataset[ev.index];
        FrameState& st = state[ev.index];
        st.arrival_ts = ev.t;
        double utility = 0.5;  // content-agnostic policies ignore utility
        if (model != nullptr) {
          const FrameFeatures feats = extract_features(fr.hist, colors, model->grid);
          utility = query_utility(*model, feats);
        }
        st.utility = utility;
        auto& acc = bucket_at(ev.t);
        ++acc.row.arrivals;

        LoadShedder::IngressFrame ingress{
            fr.frame_id, fr.camera_id, ev.t,
            static_cast<double>(fr.generation_ts_ms) + lb, utility};
        if (cfg.policy == ShedPolicy::kRandom &&
            random_policy_rng.bernoulli(cfg.random_rate)) {
          shedder.drop_at_admission(ingress, ev.t);
          break;
        }
        if (control_active) loop.on_ingress(ev.t, utility);
        for (const auto& ticket : shedder.on_frame(ingress, ev.t)) {
          start_backend(ticket, ev.t);
        }
        break;
      }
      case EventKind::kCompletion: {
        const FrameRecord& fr = dataset[ev.index];
        FrameState& st = state[ev.index];
        const double e2e = ev.t - static_cast<double>(fr.generation_ts_ms);
        const double backend_queue =
            st.backend_start - (st.dispatch_ts + cfg.net_ls_q_ms);
        if (control_active) {
          loop.on_completion(ev.t, st.exec_total, backend_queue + st.exec_total);
        }
        auto& acc = bucket_at(ev.t);
        ++acc.row.completed;
        acc.e2e_sum += e2e;
        acc.row.max_e2e_ms = std::max(acc.row.max_e2e_ms, e2e);
        if (e2e > lb) ++acc.row.violations;
        for (const auto& ticket : shedder.on_token_freed(ev.t)) {
          start_backend(ticket, ev.t);
        }
        break;
      }
      case EventKind::kTick: {
        if (auto update = loop.on_tick(ev.t)) {
          shedder.set_threshold(update->threshold);
          shedder.set_dispatch_cost_ms(update->dispatch_cost_ms);
          shedder.resize_queue(static_cast<std::size_t>(update->capacity), ev.t);
          auto& acc = bucket_at(ev.t);
          acc.row.proc_q_est_ms = loop.log().back().proc_q_ms;
          acc.row.threshold = update->threshold.value;
          acc.row.capacity = update->capacity;
        }
        const bool in_flight = shedder.tokens() < cfg.max_tokens;
        if (arrivals_left > 0 || in_flight || shedder.queue_size() > 0) {
          heap.push({ev.t + cfg.control.update_period_ms, next_order++,
                     EventKind::kTick, 0});
        }
        break;
      }
    }
    report.max_queue_len = std::max(report.max_queue_len, shedder.queue_size());
    if (shedder.queue_size() > shedder.capacity()) {
      throw std::logic_error("shedder queue exceeded its capacity");
    }
  }

  // Assemble per-frame outcomes from the shedder's sealed decisions.
  std::map<std::int64_t, const ShedEvent*> decision_by_frame;
  for (const auto& evn : shedder.events()) decision_by_frame[evn.frame_id] = &evn;

  ForwardedMap forwarded;
  report.frames.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const FrameRecord& fr = dataset[i];
    const FrameState& st = state[i];
    FrameOutcome out;
    out.frame_id = fr.frame_id;
    out.camera_id = fr.camera_id;
    out.generation_ts_ms = fr.generation_ts_ms;
    out.utility = st.utility;
    auto it = decision_by_frame.find(fr.frame_id);
    if (it != decision_by_frame.end()) {
      out.decided = true;
      out.decision = it->second->decision;
      if (out.decision == ShedDecision::kForwarded) {
        out.completed = true;
        out.e2e_ms = st.completion_ts - static_cast<double>(fr.generation_ts_ms);
        out.shed_wait_ms = st.dispatch_ts - st.arrival_ts;
        out.backend_queue_ms = st.backend_start - (st.dispatch_ts + cfg.net_ls_q_ms);
        out.exec_total_ms = st.exec_total;
        out.violation = out.e2e_ms > lb;
        out.exit_operator = cfg.operators[st.exit_op].name;
        ++report.completed;
        if (out.violation) ++report.violations;
      }
    }
    forwarded[fr.frame_id] = out.completed;
    report.frames.push_back(std::move(out));
  }

  report.shed = shedder.stats();
  report.decisions = shedder.events();
  report.control_log = loop.log();
  report.final_history.assign(loop.history().values().begin(),
                              loop.history().values().end());
  report.observed_drop_rate =
      report.shed.ingress == 0
          ? 0.0
          : static_cast<double>(report.shed.total_shed()) /
                static_cast<double>(report.shed.ingress);

  std::vector<std::string> target_colors =
      model != nullptr ? model->query.colors() : std::vector<std::string>{};
  if (model == nullptr) {
    // Without a query, every ground-truth object counts as a target.
    std::set<std::string> names;
    for (const auto& fr : dataset) {
      for (const auto& o : fr.objects) names.insert(o.color);
    }
    target_colors.assign(names.begin(), names.end());
  }
  report.overall_qor = overall_qor(forwarded, dataset, target_colors);
  if (!report.overall_qor) {
    report.qor_note = "no target objects in dataset";
  }
  std::set<std::int64_t> object_ids;
  for (const auto& fr : dataset) {
    for (const auto& o : fr.objects) {
      if (std::find(target_colors.begin(), target_colors.end(), o.color) !=
          target_colors.end()) {
        object_ids.insert(o.object_id);
      }
    }
  }
  for (std::int64_t id : object_ids) {
    report.per_object_qor[id] = per_object_qor(forwarded, dataset, id);
  }

  // Tally shed kinds into buckets from the decision log.
  for (const auto& evn : report.decisions) {
    auto& acc = bucket_at(evn.ts_ms);
    switch (evn.decision) {
      case ShedDecision::kForwarded: ++acc.row.forwarded; break;
      case ShedDecision::kShedThreshold: ++acc.row.shed_threshold; break;
      case ShedDecision::kShedQueueEviction: ++acc.row.shed_queue_eviction; break;
      case ShedDecision::kShedResize: ++acc.row.shed_resize; break;
      case ShedDecision::kShedDeadline: ++acc.row.shed_deadline; break;
    }
  }

  // Finalize buckets: compute means and carry control values forward into
  // buckets that saw no tick.
  double proc_q = 0.0;
  std::optional<double> threshold;
  int capacity = static_cast<int>(cfg.initial_queue_capacity);
  for (auto& [start, acc] : buckets) {
    if (acc.row.completed > 0) {
      acc.row.mean_e2e_ms = acc.e2e_sum / static_cast<double>(acc.row.completed);
    }
    if (acc.row.capacity == 0) {
      acc.row.proc_q_est_ms = proc_q;
      acc.row.threshold = threshold;
      acc.row.capacity = capacity;
    } else {
      proc_q = acc.row.proc_q_est_ms;
      threshold = acc.row.threshold;
      capacity = acc.row.capacity;
    }
    report.timeseries.push_back(acc.row);
  }

  return report;
}

}  // namespace frameshed
