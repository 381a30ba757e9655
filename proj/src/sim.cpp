#include "tacslip/sim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "tacslip/errors.hpp"
#include "tacslip/features.hpp"
#include "tacslip/hash.hpp"

namespace tacslip {

namespace {

constexpr double kTwoPi = 6.283185307179586;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double weight_n(double mass_g) { return mass_g * 9.81e-3; }

void check_shares(const std::array<double, 3>& shares) {
    double sum = 0.0;
    for (double s : shares) {
        if (s < 0.0) {
            throw InputError("load shares must be non-negative");
        }
        sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw InputError("load shares must sum to 1");
    }
}

}  // namespace

PinArray base_pin_layout() {
    PinArray pins;
    const double cx = 170.0;
    const double cy = 140.0;
    const int ring_count[3] = {6, 10, 14};
    const double ring_radius[3] = {22.0, 42.0, 62.0};
    int p = 0;
    for (int ring = 0; ring < 3; ++ring) {
        for (int k = 0; k < ring_count[ring]; ++k, ++p) {
            const double a = kTwoPi * k / ring_count[ring];
            pins[p].x = cx + ring_radius[ring] * std::cos(a);
            pins[p].y = cy + ring_radius[ring] * std::sin(a);
        }
    }
    return pins;
}

// ---------------------------------------------------------------------------
// SensorSynth

SensorSynth::SensorSynth(int sensor_id, const SensorNoiseProfile& profile,
                         std::uint64_t seed)
    : sensor_id_(sensor_id),
      profile_(profile),
      noise_rng_(derive_seed(seed, 0xa11ce)),
      time_rng_(derive_seed(seed, 0x7131e)) {
    positions_ = base_pin_layout();
    const double cx = 170.0;
    const double cy = 140.0;
    for (int i = 0; i < kPinCount; ++i) {
        const double dx = positions_[i].x - cx;
        const double dy = positions_[i].y - cy;
        const double n = std::hypot(dx, dy);
        radial_x_[i] = dx / n;
        radial_y_[i] = dy / n;
        // Contact deformation moves outer pins more than inner ones; slip
        // drags the whole field. 45 px is the mean ring radius.
        contact_scale_[i] = n / 45.0;
    }
}

void SensorSynth::start_transient() {
    if (profile_.transient_mag > 0.0 && profile_.transient_frames > 0) {
        transient_left_ = profile_.transient_frames;
        transient_dir_ = noise_rng_.uniform(-M_PI, M_PI);
    }
}

std::int64_t SensorSynth::frame_time(int k) {
    return llround(1000.0 + k * kFramePeriodMs + time_rng_.uniform(-2.0, 2.0));
}

PinFrame SensorSynth::next_frame(std::int64_t t_ms, double slip_speed_mm_s,
                                 double slip_dir_rad, double squeeze_delta_px) {
    const bool slipping = slip_speed_mm_s > 1e-9;
    const bool fast = slip_speed_mm_s >= kStickSlipSpeedMmS;

    double slip_px = 0.0;
    if (slipping) {
        // Only fast slip saturates the skin and decays; slow sliding
        // stick-slips and keeps producing signal.
        double factor = std::pow(profile_.slip_decay, slip_frames_);
        if (!fast) {
            factor = std::max(factor, kSustainedSlipFloor);
        }
        slip_px = profile_.slip_gain * slip_speed_mm_s * factor;
    }

    double transient_env = 0.0;
    if (transient_left_ > 0) {
        const int j = profile_.transient_frames - transient_left_;
        transient_env = std::sin(M_PI * (j + 1) / (profile_.transient_frames + 1));
    }

    PinFrame frame;
    frame.t_ms = t_ms;
    frame.sensor_id = sensor_id_;
    // Positions carry the integrated signal; measurement jitter is fresh per
    // frame so that the pin field does not random-walk while static.
    const double pos_sigma = profile_.static_jitter / std::sqrt(2.0);
    for (int i = 0; i < kPinCount; ++i) {
        double vx = 0.0;
        double vy = 0.0;
        if (slip_px > 0.0) {
            const double ang = slip_dir_rad + profile_.slip_dispersion * noise_rng_.normal();
            const double mag = slip_px * std::max(0.0, 1.0 + 0.08 * noise_rng_.normal());
            vx += mag * std::cos(ang);
            vy += mag * std::sin(ang);
        }
        if (transient_env > 0.0) {
            const double ang = transient_dir_ + profile_.transient_dispersion * noise_rng_.normal();
            const double mag = profile_.transient_mag * transient_env * contact_scale_[i] *
                               std::max(0.0, 1.0 + 0.10 * noise_rng_.normal());
            vx += mag * std::cos(ang);
            vy += mag * std::sin(ang);
        }
        if (squeeze_delta_px != 0.0) {
            vx += radial_x_[i] * contact_scale_[i] * squeeze_delta_px;
            vy += radial_y_[i] * contact_scale_[i] * squeeze_delta_px;
        }
        positions_[i].x += vx;
        positions_[i].y += vy;
        frame.pins[i].x = positions_[i].x + pos_sigma * noise_rng_.normal();
        frame.pins[i].y = positions_[i].y + pos_sigma * noise_rng_.normal();
    }

    if (transient_left_ > 0) {
        --transient_left_;
    }
    if (!slipping) {
        slip_frames_ = 0;
    } else if (fast) {
        ++slip_frames_;
    }
    return frame;
}

// ---------------------------------------------------------------------------
// Rail generator

namespace {

// Fall distance under constant acceleration up to a speed cap.
double fall_distance_mm(double tau_s, double accel, double cap) {
    if (tau_s <= 0.0) return 0.0;
    const double t_cap = cap / accel;
    if (tau_s <= t_cap) {
        return 0.5 * accel * tau_s * tau_s;
    }
    return 0.5 * accel * t_cap * t_cap + cap * (tau_s - t_cap);
}

std::string rail_config_hash(const RailRunConfig& c) {
    std::ostringstream os;
    os << "rail|" << c.retract_speed_mm_s << '|' << c.fall_accel_mm_s2 << '|'
       << c.fall_cap_mm_s << '|' << c.start_height_mm << '|' << c.noise.static_jitter
       << '|' << c.noise.transient_mag << '|' << c.noise.transient_frames << '|'
       << c.noise.slip_gain << '|' << c.noise.slip_decay << '|'
       << c.noise.slip_dispersion << '|' << c.post_onset_frames;
    return hex64(fnv1a(os.str()));
}

}  // namespace

LabeledRun gen_single_finger_run(const RailRunConfig& config, std::uint64_t seed) {
    if (config.retract_speed_mm_s < 0.1 || config.retract_speed_mm_s > 5.0) {
        throw InputError("gen_single_finger_run: retract speed must be in [0.1, 5] mm/s");
    }
    Rng rng(derive_seed(seed, 1));
    SensorSynth synth(0, config.noise, derive_seed(seed, 2));

    const bool slip_enabled = config.noise.slip_gain > 0.0;
    const double pre_s = 0.28 + 0.5 / config.retract_speed_mm_s + rng.uniform(0.0, 0.15);
    const int k_motion = std::clamp(static_cast<int>(std::lround(pre_s * kFrameHz)),
                                    config.min_pre_frames, config.max_pre_frames);
    const int n_frames = k_motion + 1 + config.post_onset_frames;
    const int transient_start = 1 + static_cast<int>(rng.below(4));
    const double slip_dir = rng.uniform(-M_PI, M_PI);

    std::vector<std::int64_t> times(n_frames);
    for (int k = 0; k < n_frames; ++k) {
        times[k] = synth.frame_time(k);
    }
    const double t_motion_s = times[k_motion] / 1000.0;

    LabeledRun run;
    run.run_id = "rail-" + std::to_string(seed);
    run.sensors.resize(1);
    run.sensors[0].reserve(n_frames);
    run.height.reserve(n_frames);

    double prev_fall = 0.0;
    int motion_frame = -1;
    for (int k = 0; k < n_frames; ++k) {
        if (k == transient_start) {
            synth.start_transient();
        }
        const double tau = times[k] / 1000.0 - t_motion_s;
        const double fall = slip_enabled
                                ? fall_distance_mm(tau, config.fall_accel_mm_s2,
                                                   config.fall_cap_mm_s)
                                : 0.0;
        double speed = 0.0;
        if (fall > prev_fall) {
            const double dt = (times[k] - times[k - 1]) / 1000.0;
            speed = (fall - prev_fall) / dt;
            if (motion_frame < 0) {
                motion_frame = k;
            }
        }
        run.sensors[0].push_back(synth.next_frame(times[k], speed, slip_dir, 0.0));
        run.height.push_back(
            {times[k], config.start_height_mm - fall +
                           rng.normal(0.0, config.height_noise_mm)});
        prev_fall = fall;
    }

    run.meta.object_name = "rail-block";
    run.meta.grasp_tag = "rail";
    run.meta.release_speed = config.retract_speed_mm_s;
    run.meta.seed = seed;
    run.meta.config_hash = rail_config_hash(config);
    run.meta.onset_t_ms = find_onset(run.height, config.fall_threshold_mm);
    if (run.meta.onset_t_ms >= 0) {
        for (int k = 0; k < n_frames; ++k) {
            if (times[k] == run.meta.onset_t_ms) {
                run.meta.onset_frame = k;
                break;
            }
        }
    }
    if (motion_frame >= 0) {
        run.meta.motion_onset_t_ms = times[motion_frame];
    }
    return run;
}

LabeledRun gen_single_finger_run(const SensorNoiseProfile& noise,
                                 double retract_speed_mm_s, std::uint64_t seed) {
    RailRunConfig config;
    config.noise = noise;
    config.retract_speed_mm_s = retract_speed_mm_s;
    return gen_single_finger_run(config, seed);
}

// ---------------------------------------------------------------------------
// Whole-hand release generator

namespace {

std::string grasp_config_hash(const GraspRunConfig& c) {
    std::ostringstream os;
    os << "grasp|" << c.release_per_frame << '|' << c.mass_g << '|' << c.hold_margin
       << '|' << c.friction_mu << '|' << c.grip_gain_n << '|' << c.contact_grip << '|'
       << c.load_shares[0] << '|' << c.load_shares[1] << '|' << c.load_shares[2];
    return hex64(fnv1a(os.str()));
}

}  // namespace

LabeledRun gen_grasp_run(const GraspRunConfig& config, std::uint64_t seed) {
    check_shares(config.load_shares);
    if (config.release_per_frame < 0.0) {
        throw InputError("gen_grasp_run: release rate must be >= 0");
    }
    Rng rng(derive_seed(seed, 3));
    std::array<std::unique_ptr<SensorSynth>, 3> synths;
    std::array<double, 3> slip_dir{};
    std::array<int, 3> transient_start{};
    for (int i = 0; i < 3; ++i) {
        synths[i] = std::make_unique<SensorSynth>(i, config.noise[i],
                                                  derive_seed(seed, 10 + i));
        slip_dir[i] = rng.uniform(-M_PI, M_PI);
        transient_start[i] = 1 + static_cast<int>(rng.below(4));
    }

    const double w = weight_n(config.mass_g);
    const double g0 = std::min(
        1.0, config.contact_grip + config.hold_margin * w / (config.friction_mu * config.grip_gain_n));
    const double mass_kg = config.mass_g / 1000.0;

    LabeledRun run;
    run.run_id = "grasp-" + std::to_string(seed);
    run.sensors.resize(3);
    run.meta.object_name = "grasp-object";
    run.meta.grasp_tag = "grasp";
    run.meta.release_speed = config.release_per_frame;
    run.meta.seed = seed;
    run.meta.config_hash = grasp_config_hash(config);

    const double dt = 1.0 / kFrameHz;
    double fall = 0.0;
    double v_fall = 0.0;  // positive = falling, mm/s
    int motion_frame = -1;
    int frames_after_motion = 0;

    for (int k = 0; k < config.max_frames; ++k) {
        const double grip =
            std::max(0.0, g0 - config.release_per_frame * std::max(0, k - config.settle_frames));
        const double cap_total =
            config.friction_mu * config.grip_gain_n * std::max(0.0, grip - config.contact_grip);

        if (cap_total < w || v_fall > 0.0) {
            // The grip only ever loosens here, so the deficit never brakes.
            const double a_mm = std::max(0.0, w - cap_total) / mass_kg * 1000.0;
            const double v_new = std::min(config.fall_cap_mm_s, v_fall + a_mm * dt);
            fall += 0.5 * (v_fall + v_new) * dt;
            v_fall = v_new;
            if (v_fall > 0.0 && motion_frame < 0) {
                motion_frame = k;
            }
        }

        for (int i = 0; i < 3; ++i) {
            if (k == transient_start[i]) {
                synths[i]->start_transient();
            }
            const double coupling = 3.0 * config.load_shares[i];
            double speed = v_fall * coupling;
            // Overloaded contacts creep before the body moves.
            const double cap_i = cap_total / 3.0;
            const double load_i = config.load_shares[i] * w;
            if (load_i > cap_i && load_i > 0.0) {
                const double creep =
                    config.creep_gain_mm_s * std::min(1.0, (load_i - cap_i) / load_i);
                speed = std::max(speed, creep);
            }
            const std::int64_t t = synths[i]->frame_time(k);
            run.sensors[i].push_back(synths[i]->next_frame(t, speed, slip_dir[i], 0.0));
        }
        run.height.push_back(
            {run.sensors[0].back().t_ms,
             config.start_height_mm - fall + rng.normal(0.0, config.height_noise_mm)});

        if (motion_frame >= 0 && ++frames_after_motion > config.post_onset_frames) {
            break;
        }
        if (motion_frame < 0 && config.release_per_frame == 0.0 &&
            k >= config.settle_frames + 120) {
            break;  // a zero-release run never slips
        }
    }

    run.meta.onset_t_ms = find_onset(run.height, config.fall_threshold_mm);
    if (run.meta.onset_t_ms >= 0) {
        for (std::size_t k = 0; k < run.height.size(); ++k) {
            if (run.height[k].t_ms == run.meta.onset_t_ms) {
                run.meta.onset_frame = static_cast<int>(k);
                break;
            }
        }
    }
    if (motion_frame >= 0 && motion_frame < static_cast<int>(run.height.size())) {
        run.meta.motion_onset_t_ms = run.height[motion_frame].t_ms;
    }
    return run;
}

LabeledRun gen_grasp_run(const std::array<SensorNoiseProfile, 3>& noise,
                         const std::array<double, 3>& load_shares,
                         double release_per_frame, std::uint64_t seed) {
    GraspRunConfig config;
    config.noise = noise;
    config.load_shares = load_shares;
    config.release_per_frame = release_per_frame;
    return gen_grasp_run(config, seed);
}

// ---------------------------------------------------------------------------
// Closed-loop grasp dynamics

double friction_capacity_n(const GraspState& state) {
    double share_sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (state.contact[i]) {
            share_sum += state.load_shares[i];
        }
    }
    return state.friction_mu * state.grip_gain_n *
           std::max(0.0, state.grip - state.contact_grip) * share_sum;
}

GraspState step_grasp(const GraspState& state, double dt_s, double grip_command) {
    if (dt_s <= 0.0) {
        throw InputError("step_grasp: dt must be positive");
    }
    GraspState s = state;
    s.t_s += dt_s;
    s.grip = clamp01(grip_command);
    const bool touching = s.grip >= s.contact_grip;
    s.contact = {touching, touching, touching};

    s.hand_height_mm += s.hand_velocity_mm_s * dt_s;

    const double cap = friction_capacity_n(s);
    const double w = weight_n(s.mass_g);
    const double mass_kg = s.mass_g / 1000.0;
    const double rel = s.hand_velocity_mm_s - s.object_velocity_mm_s;

    if (std::abs(rel) < 1e-12 && cap >= w) {
        // Static friction holds; the object rides with the hand.
        s.object_velocity_mm_s = s.hand_velocity_mm_s;
        if (s.on_table && s.object_velocity_mm_s > 0.0) {
            s.on_table = false;
        }
        if (!s.on_table) {
            s.object_height_mm += s.object_velocity_mm_s * dt_s;
        }
        return s;
    }

    // Sliding. Below the weight the deficit pulls the object down; between
    // the weight and momentum_factor * weight the drag balances gravity but
    // cannot change the relative motion; only above that does it brake.
    double a_mm;  // mm/s^2, positive = toward the hand's motion
    if (cap < w) {
        a_mm = (cap - w) / mass_kg * 1000.0;
    } else if (cap <= s.momentum_factor * w) {
        a_mm = 0.0;
    } else {
        a_mm = (cap - s.momentum_factor * w) / mass_kg * 1000.0;
    }

    if (s.on_table) {
        if (a_mm <= 0.0) {
            s.object_velocity_mm_s = 0.0;  // the table carries it
            return s;
        }
        s.on_table = false;  // drag beats gravity and momentum: lift-off
    }

    double v = s.object_velocity_mm_s;
    double h = s.object_height_mm;
    const double v_new = v + a_mm * dt_s;
    const bool crosses =
        a_mm > 0.0 && v < s.hand_velocity_mm_s && v_new >= s.hand_velocity_mm_s;
    if (crosses) {
        const double t_star = (s.hand_velocity_mm_s - v) / a_mm;
        h += v * t_star + 0.5 * a_mm * t_star * t_star;
        h += s.hand_velocity_mm_s * (dt_s - t_star);
        v = s.hand_velocity_mm_s;  // caught up; static hold takes over
    } else {
        h += v * dt_s + 0.5 * a_mm * dt_s * dt_s;
        v = v_new;
    }
    s.object_velocity_mm_s = v;
    s.object_height_mm = h;
    return s;
}

double find_g_min(double mass_g, const GraspState& physics, double lift_accel_m_s2,
                  double tol) {
    if (mass_g <= 0.0) {
        throw InputError("find_g_min: mass must be positive");
    }
    const double needed = mass_g * (9.81e-3 + lift_accel_m_s2 * 1e-3);
    auto capacity = [&](double g) {
        return physics.friction_mu * physics.grip_gain_n *
               std::max(0.0, g - physics.contact_grip);
    };
    if (capacity(1.0) < needed) {
        throw InputError("find_g_min: object too heavy to lift within the grip range");
    }
    double lo = physics.contact_grip;
    double hi = 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (capacity(mid) >= needed) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

double overgrasp(double g_cont, double g_min, double g_slip) {
    if (g_min <= g_cont) {
        throw InputError("overgrasp: g_min must exceed g_cont");
    }
    return (g_slip - g_min) / (g_min - g_cont);
}

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::kCaught: return "caught";
        case Outcome::kDropped: return "dropped";
        case Outcome::kFalsePositive: return "false_positive";
        case Outcome::kLifted: return "lifted";
        case Outcome::kCrushedNotModeled: return "crushed-not-modeled";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Scenario: grasp destabilisation

ScenarioResult scenario_destabilise(const ClassifierModel& model,
                                    const DestabiliseConfig& config, std::uint64_t seed) {
    check_shares(config.load_shares);
    Rng rng(derive_seed(seed, 4));
    std::array<std::unique_ptr<SensorSynth>, 3> synths;
    std::array<double, 3> slip_dir{};
    for (int i = 0; i < 3; ++i) {
        synths[i] = std::make_unique<SensorSynth>(i, config.noise, derive_seed(seed, 20 + i));
        slip_dir[i] = rng.uniform(-M_PI, M_PI);
    }

    GraspState state;
    state.load_shares = config.load_shares;
    state.mass_g = config.initial_mass_g;
    state.object_height_mm = config.start_height_mm;
    state.on_table = false;
    state.friction_mu = config.friction_mu;
    state.grip_gain_n = config.grip_gain_n;
    state.contact_grip = config.contact_grip;
    state.momentum_factor = config.momentum_factor;

    const double w0 = weight_n(config.initial_mass_g);
    const double g0 = std::min(
        1.0, config.contact_grip +
                 config.grip_margin * w0 / (config.friction_mu * config.grip_gain_n));
    state.grip = g0;
    double grip_cmd = g0;
    double grip_act = g0;

    MultiSensorDetector detector(model, config.strategy, 3);

    ScenarioResult result;
    result.run.run_id = "destabilise-" + std::to_string(seed);
    result.run.sensors.resize(3);
    result.run.meta.object_name = "ramped-mass";
    result.run.meta.grasp_tag = "destabilise";
    result.run.meta.seed = seed;
    result.g_cont = config.contact_grip;

    const double dt = 1.0 / kFrameHz;
    const int n_frames = static_cast<int>(config.duration_s * kFrameHz);
    double min_height = config.start_height_mm;
    bool motion_seen = false;
    bool dropped = false;

    for (int k = 0; k < n_frames; ++k) {
        state.mass_g += config.mass_ramp_g_s * dt;
        const double slew = config.grip_rate_per_s * dt;
        grip_act += std::clamp(grip_cmd - grip_act, -slew, slew);
        const double prev_grip = state.grip;
        state = step_grasp(state, dt, grip_act);
        const double squeeze = config.deform_gain_px * (state.grip - prev_grip);

        min_height = std::min(min_height, state.object_height_mm);
        if (config.start_height_mm - state.object_height_mm > config.drop_limit_mm) {
            dropped = true;
            break;
        }
        const double rel = state.hand_velocity_mm_s - state.object_velocity_mm_s;
        if (rel > 1e-9) {
            motion_seen = true;
        }

        for (int i = 0; i < 3; ++i) {
            const std::int64_t t = synths[i]->frame_time(k);
            PinFrame frame = synths[i]->next_frame(t, rel * 3.0 * config.load_shares[i],
                                                   slip_dir[i], squeeze);
            std::optional<DecisionRecord> rec;
            std::optional<TriggerEvent> event = detector.ingest(frame, &rec);
            result.run.sensors[i].push_back(std::move(frame));
            if (rec) {
                result.decisions.push_back(*rec);
            }
            if (event) {
                ++result.slips_detected;
                result.trigger_t_ms.push_back(event->t_ms);
                grip_cmd = std::min(1.0, grip_cmd + config.response_step);
            }
        }
        result.run.height.push_back(
            {result.run.sensors[0].back().t_ms, state.object_height_mm});
    }

    result.slip_distance_mm = config.start_height_mm - min_height;
    result.g_slip = state.grip;
    if (dropped) {
        result.outcome = Outcome::kDropped;
    } else if (!motion_seen && !result.trigger_t_ms.empty()) {
        result.outcome = Outcome::kFalsePositive;
    } else {
        result.outcome = Outcome::kCaught;
    }
    if (!result.run.height.empty()) {
        result.run.meta.onset_t_ms = find_onset(result.run.height, 2.0);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Scenario: first-time grasping

ScenarioResult scenario_first_grasp(const ClassifierModel& model,
                                    const FirstGraspConfig& config, std::uint64_t seed) {
    check_shares(config.load_shares);
    if (config.mass_g <= 0.0) {
        throw InputError("scenario_first_grasp: mass must be positive");
    }
    Rng rng(derive_seed(seed, 5));
    std::array<std::unique_ptr<SensorSynth>, 3> synths;
    std::array<double, 3> slip_dir{};
    for (int i = 0; i < 3; ++i) {
        synths[i] = std::make_unique<SensorSynth>(i, config.noise, derive_seed(seed, 30 + i));
        slip_dir[i] = rng.uniform(-M_PI, M_PI);
    }

    GraspState state;
    state.load_shares = config.load_shares;
    state.mass_g = config.mass_g;
    state.object_height_mm = 0.0;
    state.on_table = true;
    state.friction_mu = config.friction_mu;
    state.grip_gain_n = config.grip_gain_n;
    state.contact_grip = config.contact_grip;
    state.momentum_factor = config.momentum_factor;

    StrategyConfig strategy{1, 1, 50,
                            static_cast<std::int64_t>(config.response_delay_s * 1000.0)};
    MultiSensorDetector detector(model, strategy, 3);

    ScenarioResult result;
    result.run.run_id = "first-grasp-" + std::to_string(seed);
    result.run.sensors.resize(3);
    result.run.meta.object_name = "unknown-mass";
    result.run.meta.grasp_tag = "first-grasp";
    result.run.meta.seed = seed;

    const double dt = 1.0 / kFrameHz;
    const int max_frames = static_cast<int>(config.max_duration_s * kFrameHz);
    std::array<PinFrame, 3> reference{};
    bool have_reference = false;
    bool contact_found = false;
    double grip_cmd = 0.0;
    double grip_act = 0.0;
    int k = 0;
    bool lifted = false;
    bool saturated = false;

    auto emit_frames = [&](double rel_speed, double squeeze) {
        std::optional<TriggerEvent> fired;
        for (int i = 0; i < 3; ++i) {
            const std::int64_t t = synths[i]->frame_time(k);
            PinFrame frame = synths[i]->next_frame(
                t, rel_speed * 3.0 * config.load_shares[i], slip_dir[i], squeeze);
            if (!have_reference) {
                reference[i] = frame;
            }
            if (contact_found) {
                std::optional<DecisionRecord> rec;
                std::optional<TriggerEvent> event = detector.ingest(frame, &rec);
                if (rec) {
                    result.decisions.push_back(*rec);
                }
                if (event && !fired) {
                    fired = event;
                }
            }
            result.run.sensors[i].push_back(std::move(frame));
        }
        have_reference = true;
        result.run.height.push_back(
            {result.run.sensors[0].back().t_ms, state.object_height_mm});
        return fired;
    };

    // Phase 1: close until the sensors report enough deformation.
    for (; k < max_frames; ++k) {
        grip_cmd = std::min(1.0, grip_cmd + config.close_rate_per_frame);
        const double prev_past = std::max(0.0, state.grip - config.contact_grip);
        state = step_grasp(state, dt, grip_cmd);
        const double past = std::max(0.0, state.grip - config.contact_grip);
        const double squeeze = config.deform_gain_px * (past - prev_past);
        emit_frames(0.0, squeeze);

        double mean_def = 0.0;
        for (int i = 0; i < 3; ++i) {
            mean_def += deformation(reference[i], result.run.sensors[i].back());
        }
        mean_def /= 3.0;
        if (mean_def >= config.deformation_threshold_px) {
            contact_found = true;
            result.g_cont = state.grip;
            ++k;
            break;
        }
        if (grip_cmd >= 1.0) {
            break;  // closed fully without registering contact
        }
    }
    if (!contact_found) {
        result.outcome = Outcome::kDropped;
        result.g_slip = state.grip;
        return result;
    }

    // Phase 2: lift; every detected slip tightens the grip after a delay.
    detector.reset();
    state.hand_velocity_mm_s = config.lift_speed_mm_s;
    grip_cmd = state.grip;
    grip_act = state.grip;
    for (; k < max_frames; ++k) {
        const double slew = config.grip_rate_per_s * dt;
        grip_act += std::clamp(grip_cmd - grip_act, -slew, slew);
        const double prev_past = std::max(0.0, state.grip - config.contact_grip);
        state = step_grasp(state, dt, grip_act);
        const double past = std::max(0.0, state.grip - config.contact_grip);
        const double squeeze = config.deform_gain_px * (past - prev_past);
        const double rel = state.hand_velocity_mm_s - state.object_velocity_mm_s;

        std::optional<TriggerEvent> event = emit_frames(std::max(0.0, rel), squeeze);
        if (event) {
            ++result.slips_detected;
            result.trigger_t_ms.push_back(event->t_ms);
            if (grip_cmd >= 1.0 - 1e-12) {
                saturated = true;
                break;
            }
            grip_cmd = std::min(1.0, grip_cmd + config.grip_step);
        }
        if (state.object_height_mm >= config.lift_success_mm) {
            lifted = true;
            break;
        }
    }

    result.g_slip = state.grip;
    result.outcome = lifted ? Outcome::kLifted : Outcome::kDropped;
    if (saturated) {
        result.outcome = Outcome::kDropped;
    }
    try {
        result.g_min = find_g_min(config.mass_g, state, config.lift_accel_m_s2);
        if (result.g_min > result.g_cont) {
            result.overgrasp_ratio = overgrasp(result.g_cont, result.g_min, result.g_slip);
        }
    } catch (const InputError&) {
        result.g_min = 0.0;  // heavier than the grip range; overgrasp undefined
    }
    return result;
}

}  // namespace tacslip
