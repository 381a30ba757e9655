#include "tacslip/online.hpp"

#include <algorithm>

#include "tacslip/errors.hpp"
#include "tacslip/features.hpp"

namespace tacslip {

namespace {

void validate_strategy(const StrategyConfig& s, int sensor_count) {
    if (s.n_frames < 1 || s.n_sensors < 1) {
        throw InputError("strategy: n_frames and n_sensors must be >= 1");
    }
    if (s.n_sensors > sensor_count) {
        throw InputError("strategy: n_sensors exceeds the attached sensor count");
    }
    if (s.window_ms <= 0 || s.refractory_ms < 0) {
        throw InputError("strategy: bad window or refractory period");
    }
}

}  // namespace

MultiSensorDetector::MultiSensorDetector(ClassifierModel model, StrategyConfig strategy,
                                         int sensor_count)
    : strategy_(strategy), global_(true) {
    if (sensor_count < 1) {
        throw InputError("detector: need at least one sensor");
    }
    validate_strategy(strategy_, sensor_count);
    models_.push_back(std::move(model));
    states_.resize(sensor_count);
    for (int i = 0; i < sensor_count; ++i) {
        states_[i].sensor_id = i;
    }
}

MultiSensorDetector::MultiSensorDetector(std::vector<ClassifierModel> models,
                                         StrategyConfig strategy)
    : models_(std::move(models)), strategy_(strategy), global_(false) {
    if (models_.empty()) {
        throw InputError("detector: local mode needs one model per sensor");
    }
    validate_strategy(strategy_, static_cast<int>(models_.size()));
    states_.resize(models_.size());
    for (std::size_t i = 0; i < models_.size(); ++i) {
        states_[i].sensor_id = static_cast<int>(i);
    }
}

const ClassifierModel& MultiSensorDetector::model_for(int sensor_id) const {
    return global_ ? models_[0] : models_[sensor_id];
}

const SensorRuntimeState& MultiSensorDetector::sensor_state(int sensor_id) const {
    std::lock_guard lock(mutex_);
    if (sensor_id < 0 || sensor_id >= static_cast<int>(states_.size())) {
        throw InputError("detector: unknown sensor");
    }
    return states_[sensor_id];
}

std::optional<TriggerEvent> MultiSensorDetector::ingest(
    const PinFrame& frame, std::optional<DecisionRecord>* decision_out) {
    std::lock_guard lock(mutex_);
    if (decision_out) {
        decision_out->reset();
    }
    if (frame.sensor_id < 0 || frame.sensor_id >= static_cast<int>(states_.size())) {
        throw InputError("detector: unknown sensor id");
    }
    SensorRuntimeState& st = states_[frame.sensor_id];
    if (st.last_frame && frame.t_ms <= st.last_frame->t_ms) {
        throw InputError("detector: out-of-order frame, timestamps must increase");
    }
    if (!st.last_frame) {
        st.last_frame = frame;
        return std::nullopt;  // nothing to diff against yet
    }

    const FeatureSample sample = featurize(*st.last_frame, frame);
    st.last_frame = frame;
    const Prediction pred = classify(model_for(frame.sensor_id), sample);

    if (pred.label == Label::kSlip) {
        ++st.consecutive_slips;
    } else {
        st.consecutive_slips = 0;
    }
    st.slipping = st.consecutive_slips >= strategy_.n_frames;
    st.last_decision_t_ms = frame.t_ms;
    st.last_score = pred.score;

    std::optional<TriggerEvent> event;
    const bool refractory = frame.t_ms < refractory_until_ms_;
    if (!refractory && st.slipping) {
        TriggerEvent candidate;
        candidate.t_ms = frame.t_ms;
        for (const SensorRuntimeState& other : states_) {
            if (other.slipping &&
                frame.t_ms - other.last_decision_t_ms <= strategy_.window_ms) {
                candidate.sensors.push_back(other.sensor_id);
                candidate.scores.push_back(other.last_score);
            }
        }
        if (static_cast<int>(candidate.sensors.size()) >= strategy_.n_sensors) {
            event = std::move(candidate);
            refractory_until_ms_ = frame.t_ms + strategy_.refractory_ms;
            for (SensorRuntimeState& s : states_) {
                s.consecutive_slips = 0;
                s.slipping = false;
            }
        }
    }

    if (decision_out) {
        DecisionRecord rec;
        rec.t_ms = frame.t_ms;
        rec.sensor = frame.sensor_id;
        rec.label = pred.label;
        rec.score = pred.score;
        rec.count = event ? 0 : st.consecutive_slips;
        rec.trigger = event.has_value();
        *decision_out = rec;
    }
    return event;
}

void MultiSensorDetector::reset() {
    std::lock_guard lock(mutex_);
    for (SensorRuntimeState& st : states_) {
        st.last_frame.reset();
        st.consecutive_slips = 0;
        st.slipping = false;
        st.last_decision_t_ms = std::numeric_limits<std::int64_t>::min();
        st.last_score = 0.0;
    }
    refractory_until_ms_ = std::numeric_limits<std::int64_t>::min();
}

namespace {

double height_baseline(const std::vector<HeightSample>& height) {
    const std::size_t n_base = std::min<std::size_t>(10, height.size());
    std::vector<double> base;
    base.reserve(n_base);
    for (std::size_t i = 0; i < n_base; ++i) {
        base.push_back(height[i].height_mm);
    }
    std::sort(base.begin(), base.end());
    return n_base % 2 == 1 ? base[n_base / 2]
                           : 0.5 * (base[n_base / 2 - 1] + base[n_base / 2]);
}

StreamResult replay(MultiSensorDetector& detector, const LabeledRun& run,
                    const TriggerCallback& on_trigger) {
    std::vector<const PinFrame*> frames;
    for (const auto& stream : run.sensors) {
        for (const PinFrame& f : stream) {
            frames.push_back(&f);
        }
    }
    std::stable_sort(frames.begin(), frames.end(),
                     [](const PinFrame* a, const PinFrame* b) {
                         if (a->t_ms != b->t_ms) return a->t_ms < b->t_ms;
                         return a->sensor_id < b->sensor_id;
                     });

    StreamResult result;
    const std::int64_t onset = run.meta.onset_t_ms;
    for (const PinFrame* f : frames) {
        std::optional<DecisionRecord> rec;
        std::optional<TriggerEvent> event = detector.ingest(*f, &rec);
        if (rec) {
            result.decisions.push_back(*rec);
        }
        if (event) {
            result.triggers.push_back(*event);
            if (!result.first_trigger_t_ms) {
                result.first_trigger_t_ms = event->t_ms;
            }
            if (onset >= 0 && event->t_ms >= onset) {
                ++result.tp_triggers;
            } else {
                ++result.fp_triggers;
            }
            if (on_trigger) {
                on_trigger(*event);
            }
        }
    }

    if (onset >= 0) {
        result.false_negative = result.tp_triggers == 0;
        if (result.first_trigger_t_ms) {
            result.first_trigger_latency_ms =
                static_cast<double>(*result.first_trigger_t_ms - onset);
        }
    }
    if (result.first_trigger_t_ms && !run.height.empty()) {
        const std::int64_t t = *result.first_trigger_t_ms;
        const double baseline = height_baseline(run.height);
        double h = run.height.front().height_mm;
        for (const HeightSample& hs : run.height) {
            if (hs.t_ms > t) break;
            h = hs.height_mm;
        }
        result.caught_distance_mm = std::max(0.0, baseline - h);
    }
    return result;
}

}  // namespace

StreamResult run_stream(const ClassifierModel& model, const LabeledRun& run,
                        const StrategyConfig& strategy, const TriggerCallback& on_trigger) {
    if (run.sensors.empty()) {
        throw InputError("run_stream: run has no sensor streams");
    }
    int max_id = 0;
    for (const auto& stream : run.sensors) {
        for (const PinFrame& f : stream) {
            max_id = std::max(max_id, f.sensor_id);
        }
    }
    MultiSensorDetector detector(model, strategy, max_id + 1);
    return replay(detector, run, on_trigger);
}

StreamResult run_stream_local(const std::vector<ClassifierModel>& models,
                              const LabeledRun& run, const StrategyConfig& strategy,
                              const TriggerCallback& on_trigger) {
    if (run.sensors.empty()) {
        throw InputError("run_stream: run has no sensor streams");
    }
    MultiSensorDetector detector(models, strategy);
    return replay(detector, run, on_trigger);
}

}  // namespace tacslip
