#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <vector>

#include "tacslip/classifiers.hpp"
#include "tacslip/dataset.hpp"
#include "tacslip/types.hpp"

namespace tacslip {

// Fusion policy: a response fires once n_sensors sensors each report
// n_frames consecutive slip classifications inside the simultaneity window.
struct StrategyConfig {
    int n_frames = 2;
    int n_sensors = 2;
    std::int64_t window_ms = 50;      // decisions older than this cannot co-trigger
    std::int64_t refractory_ms = 100; // suppression after a trigger
};

struct SensorRuntimeState {
    int sensor_id = -1;
    std::optional<PinFrame> last_frame;
    int consecutive_slips = 0;
    std::int64_t last_decision_t_ms = std::numeric_limits<std::int64_t>::min();
    double last_score = 0.0;
    bool slipping = false;  // consecutive_slips >= n_frames
};

struct TriggerEvent {
    std::int64_t t_ms = 0;
    std::vector<int> sensors;        // contributing sensor ids
    std::vector<double> scores;      // their latest scores, same order
};

struct DecisionRecord {
    std::int64_t t_ms = 0;
    int sensor = 0;
    Label label = Label::kStatic;
    double score = 0.0;
    int count = 0;      // consecutive slip classifications after this decision
    bool trigger = false;
};

// Streaming per-sensor classification with asynchronous fusion. One shared
// model (global mode) or one model per sensor (local mode). Ingestion is
// serialized internally; frames of a single sensor must arrive in strictly
// increasing timestamp order. Per-sensor counts reset on every trigger.
class MultiSensorDetector {
public:
    MultiSensorDetector(ClassifierModel model, StrategyConfig strategy, int sensor_count);
    MultiSensorDetector(std::vector<ClassifierModel> models, StrategyConfig strategy);

    // Featurize against the sensor's previous frame, classify, update the
    // consecutive count and evaluate the fusion rule. The first frame of a
    // sensor only primes its state and produces no decision, in which case
    // *decision_out (when requested) is left empty.
    std::optional<TriggerEvent> ingest(const PinFrame& frame,
                                       std::optional<DecisionRecord>* decision_out = nullptr);

    void reset();

    const SensorRuntimeState& sensor_state(int sensor_id) const;
    const StrategyConfig& strategy() const { return strategy_; }
    int sensor_count() const { return static_cast<int>(states_.size()); }

private:
    const ClassifierModel& model_for(int sensor_id) const;

    std::vector<ClassifierModel> models_;  // size 1 (global) or sensor_count (local)
    StrategyConfig strategy_;
    std::vector<SensorRuntimeState> states_;
    std::int64_t refractory_until_ms_ = std::numeric_limits<std::int64_t>::min();
    bool global_ = true;
    mutable std::mutex mutex_;
};

// Replay of a recorded run through a fresh detector in global timestamp
// order (ties broken by sensor id). Triggers at/after the run's ground-truth
// onset are true positives, earlier ones false positives; a run with an
// onset but no trigger by the end of the stream is a false negative.
struct StreamResult {
    std::vector<DecisionRecord> decisions;
    std::vector<TriggerEvent> triggers;
    int tp_triggers = 0;
    int fp_triggers = 0;
    bool false_negative = false;
    std::optional<std::int64_t> first_trigger_t_ms;
    std::optional<double> first_trigger_latency_ms;  // first trigger minus onset
    // Object fall at the first trigger (0 when nothing fell or no trigger).
    double caught_distance_mm = 0.0;
};

using TriggerCallback = std::function<void(const TriggerEvent&)>;

StreamResult run_stream(const ClassifierModel& model,
                        const LabeledRun& run,
                        const StrategyConfig& strategy,
                        const TriggerCallback& on_trigger = {});

StreamResult run_stream_local(const std::vector<ClassifierModel>& models,
                              const LabeledRun& run,
                              const StrategyConfig& strategy,
                              const TriggerCallback& on_trigger = {});

}  // namespace tacslip
