#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frameshed/color_features.hpp"
#include "frameshed/control_loop.hpp"
#include "frameshed/shedder.hpp"
#include "frameshed/utility_model.hpp"

namespace frameshed {

class Rng;

struct GroundTruthObject {
  std::int64_t object_id = 0;
  std::string color;
};

// What the backend's cheap filters would decide for this frame; fixed by the
// data generator. A frame containing a target object passes both.
struct StageFlags {
  bool passes_blob_filter = false;
  bool passes_color_filter = false;
};

struct FrameRecord {
  std::int64_t frame_id = 0;
  std::int32_t camera_id = 0;
  std::int64_t generation_ts_ms = 0;
  HsvHistogram hist;
  std::vector<GroundTruthObject> objects;
  StageFlags stage_flags;
};

struct LatencySpec {
  enum class Kind { kConstant, kUniform, kNormal };
  Kind kind = Kind::kConstant;
  double a = 0.0;  // constant value | uniform lo | normal mean
  double b = 0.0;  // uniform hi | normal stddev

  static LatencySpec constant(double ms) { return {Kind::kConstant, ms, 0.0}; }
  static LatencySpec uniform(double lo, double hi) { return {Kind::kUniform, lo, hi}; }
  static LatencySpec normal(double mean, double sd) { return {Kind::kNormal, mean, sd}; }

  double sample(Rng& rng) const;
};

// Which frames an operator forwards downstream. A frame that fails the rule
// is still executed by the operator; it just exits the pipeline there.
enum class PassRule { kAll, kBlobFlag, kColorFlag };

struct OperatorProfile {
  std::string name;
  LatencySpec exec_latency_ms;
  PassRule pass_rule = PassRule::kAll;
};

// blob filter (2 ms) -> color filter (3 ms) -> dnn (default 300 ms) -> sink.
std::vector<OperatorProfile> default_operator_chain(double dnn_ms = 300.0);

enum class ShedPolicy { kUtility, kRandom, kNone };

struct SimConfig {
  std::vector<OperatorProfile> operators = default_operator_chain();
  double net_cam_ls_ms = 40.0;
  double net_ls_q_ms = 40.0;
  double proc_cam_ms = 20.0;
  ControlConfig control;  // latency_bound_ms is the per-frame deadline LB
  std::size_t history_capacity = 2000;
  int max_tokens = 1;
  std::size_t initial_queue_capacity = 1;
  ShedPolicy policy = ShedPolicy::kUtility;
  double random_rate = 0.0;  // admission drop probability for kRandom
  bool seed_history_from_model = true;
  std::uint64_t seed = 1;
};

struct FrameOutcome {
  std::int64_t frame_id = 0;
  std::int32_t camera_id = 0;
  std::int64_t generation_ts_ms = 0;
  double utility = 0.0;
  ShedDecision decision = ShedDecision::kShedThreshold;
  bool decided = false;    // false only if still queued at simulation end
  bool completed = false;  // passed through the backend
  double e2e_ms = 0.0;
  double shed_wait_ms = 0.0;      // dispatch - arrival at shedder
  double backend_queue_ms = 0.0;  // wait for the serial executor
  double exec_total_ms = 0.0;     // sum of operator exec latencies traversed
  bool violation = false;         // completed with e2e > LB
  std::string exit_operator;
};

// One 5-second aggregation bucket of the run.
struct BucketRow {
  std::int64_t bucket_start_ms = 0;
  std::int64_t arrivals = 0;
  std::int64_t forwarded = 0;
  std::int64_t shed_threshold = 0;
  std::int64_t shed_queue_eviction = 0;
  std::int64_t shed_resize = 0;
  std::int64_t shed_deadline = 0;
  std::int64_t completed = 0;
  std::int64_t violations = 0;
  double mean_e2e_ms = 0.0;
  double max_e2e_ms = 0.0;
  std::vector<std::int64_t> stage_counts;  // aligned with operator_names
  double proc_q_est_ms = 0.0;              // last control values in bucket
  std::optional<double> threshold;
  int capacity = 0;
};

struct RunReport {
  std::vector<FrameOutcome> frames;  // dataset order
  ShedderStats shed;
  double observed_drop_rate = 0.0;
  std::int64_t completed = 0;
  std::int64_t violations = 0;
  std::map<std::int64_t, double> per_object_qor;
  std::optional<double> overall_qor;
  std::string qor_note;
  std::vector<ControlRecord> control_log;
  std::vector<ShedEvent> decisions;
  std::vector<BucketRow> timeseries;
  std::vector<std::string> operator_names;
  std::size_t max_queue_len = 0;
  std::vector<double> final_history;  // utility window at simulation end
};

// Merges per-camera streams into one generation-timestamp-ordered stream;
// ties broken by camera_id. Throws InputError if any input is unsorted.
std::vector<FrameRecord> interleave_cameras(
    std::vector<std::vector<FrameRecord>> streams);

// Frame-id -> forwarded mapping extracted from a run or an offline sweep.
using ForwardedMap = std::map<std::int64_t, bool>;

// Fraction of the object's frames that were forwarded. Throws InputError
// when the object never appears in the dataset.
double per_object_qor(const ForwardedMap& forwarded,
                      std::span<const FrameRecord> dataset,
                      std::int64_t object_id);

// Mean per-object QoR over all objects whose color is in target_colors;
// nullopt when the dataset contains no target object.
std::optional<double> overall_qor(const ForwardedMap& forwarded,
                                  std::span<const FrameRecord> dataset,
                                  const std::vector<std::string>& target_colors);

// Deterministic discrete-event simulation of the camera -> shedder ->
// backend pipeline. `model` may be null for kRandom/kNone policies.
RunReport run_simulation(const SimConfig& cfg, const UtilityModel* model,
                         std::span<const FrameRecord> dataset);

}  // namespace frameshed
