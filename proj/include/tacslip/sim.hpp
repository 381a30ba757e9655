#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tacslip/classifiers.hpp"
#include "tacslip/dataset.hpp"
#include "tacslip/online.hpp"
#include "tacslip/rng.hpp"
#include "tacslip/types.hpp"

namespace tacslip {

inline constexpr double kFrameHz = 60.0;
inline constexpr double kFramePeriodMs = 1000.0 / kFrameHz;
inline constexpr double kGravityMmS2 = 9810.0;

// Per-sensor signal model. All magnitudes in pixels per frame unless noted.
struct SensorNoiseProfile {
    double static_jitter = 0.02;        // gaussian per-component noise, always on
    double transient_mag = 0.5;         // peak of the contact-onset burst
    int transient_frames = 6;           // burst duration in frames
    double transient_dispersion = 0.8;  // radians, per-pin angle spread in the burst
    double slip_gain = 0.008;           // px/frame per mm/s of relative slip
    double slip_decay = 0.8;           // per-frame attenuation after slip onset, (0, 1]
    double slip_dispersion = 0.25;      // radians, per-pin angle spread while slipping
};

// Below this relative speed a sliding contact stick-slips instead of
// saturating, so the decayed signal holds at this fraction of full strength.
inline constexpr double kStickSlipSpeedMmS = 30.0;
inline constexpr double kSustainedSlipFloor = 0.5;

// Synthesizes one sensor's pin stream frame by frame. Pure function of the
// seed and the per-frame command sequence.
class SensorSynth {
public:
    SensorSynth(int sensor_id, const SensorNoiseProfile& profile, std::uint64_t seed);

    // Schedule a contact burst starting at the next frame.
    void start_transient();

    // Produce the frame at time t_ms. slip_speed_mm_s is the relative
    // object/sensor speed (the profile gain converts it to pixels), slip_dir
    // the common image-space direction, squeeze_delta_px a radial spread for
    // contact deformation. Decay is tracked internally per slip episode.
    PinFrame next_frame(std::int64_t t_ms, double slip_speed_mm_s, double slip_dir_rad,
                        double squeeze_delta_px);

    // Jittered 60 Hz timestamp of frame k (+-2 ms per-sensor measurement
    // noise, always strictly increasing).
    std::int64_t frame_time(int k);

    int sensor_id() const { return sensor_id_; }

private:
    int sensor_id_;
    SensorNoiseProfile profile_;
    Rng noise_rng_;
    Rng time_rng_;
    PinArray positions_;
    std::array<double, kPinCount> radial_x_{};
    std::array<double, kPinCount> radial_y_{};
    std::array<double, kPinCount> contact_scale_{};  // deformation is ring-dependent
    int transient_left_ = 0;
    double transient_dir_ = 0.0;
    int slip_frames_ = 0;  // consecutive slipping frames, drives the decay
};

// Canonical 30-pin ring layout (image space, pixels).
PinArray base_pin_layout();

// ---------------------------------------------------------------------------
// Open-loop generators for offline training data.

struct RailRunConfig {
    SensorNoiseProfile noise{};
    double retract_speed_mm_s = 1.0;  // [0.1, 5.0]
    double fall_accel_mm_s2 = 8000.0; // low-friction rail, below free fall
    double fall_cap_mm_s = 300.0;
    double start_height_mm = 120.0;
    double height_noise_mm = 0.05;
    double fall_threshold_mm = 2.0;   // marker-drop rule recorded in metadata
    int post_onset_frames = 26;
    int min_pre_frames = 18;
    int max_pre_frames = 72;
};

// Single-finger rail trial: static hold, optional contact burst, then the
// object accelerates away while the pin signal decays. A zero slip gain
// disables the slip event entirely (the retraction never destabilizes the
// object).
LabeledRun gen_single_finger_run(const RailRunConfig& config, std::uint64_t seed);
LabeledRun gen_single_finger_run(const SensorNoiseProfile& noise,
                                 double retract_speed_mm_s, std::uint64_t seed);

struct GraspRunConfig {
    std::array<SensorNoiseProfile, 3> noise{};
    std::array<double, 3> load_shares{1.0 / 3, 1.0 / 3, 1.0 / 3};
    double release_per_frame = 0.005;  // grip fraction removed per frame
    double mass_g = 180.0;
    double hold_margin = 1.3;          // initial capacity over weight
    double friction_mu = 0.6;
    double grip_gain_n = 12.0;         // newtons of capacity per unit grip
    double contact_grip = 0.08;
    double momentum_factor = 1.2;
    double fall_cap_mm_s = 300.0;
    double start_height_mm = 120.0;
    double height_noise_mm = 0.05;
    double fall_threshold_mm = 2.0;
    double creep_gain_mm_s = 3.0;      // local micro-slip speed at full overload
    int settle_frames = 20;
    int post_onset_frames = 26;
    int max_frames = 600;
};

// Whole-hand release trial: grip ramps down, loaded sensors creep first,
// then the object body falls. Sensor load shares control both when a sensor
// starts to move and how strongly it sees the common slip.
LabeledRun gen_grasp_run(const GraspRunConfig& config, std::uint64_t seed);
LabeledRun gen_grasp_run(const std::array<SensorNoiseProfile, 3>& noise,
                         const std::array<double, 3>& load_shares,
                         double release_per_frame, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Closed-loop grasp dynamics.

struct GraspState {
    double grip = 0.0;  // fraction of the actuation range [0, 1]
    std::array<double, 3> load_shares{1.0 / 3, 1.0 / 3, 1.0 / 3};
    double mass_g = 0.0;
    double object_height_mm = 0.0;
    double object_velocity_mm_s = 0.0;  // negative = falling
    double hand_height_mm = 0.0;
    double hand_velocity_mm_s = 0.0;
    std::array<bool, 3> contact{false, false, false};
    bool on_table = false;  // a table supports the object until it is lifted
    double friction_mu = 0.6;
    double grip_gain_n = 12.0;
    double contact_grip = 0.08;
    double momentum_factor = 1.2;  // stopping needs this much more capacity
    double t_s = 0.0;
};

// Static friction capacity of the current grip, newtons.
double friction_capacity_n(const GraspState& state);

// Advance the grasp by dt. The object moves with the hand while the static
// capacity covers its weight; otherwise it slides, braked by the kinetic
// capacity (static divided by the momentum factor). Constant-acceleration
// segments integrate exactly.
GraspState step_grasp(const GraspState& state, double dt_s, double grip_command);

// Minimal grip whose capacity lifts the mass at lift_accel, by bisection to
// tol in grip units. Throws InputError when no grip <= 1 suffices.
double find_g_min(double mass_g, const GraspState& physics,
                  double lift_accel_m_s2 = 0.1, double tol = 1e-4);

// o = (g_slip - g_min) / (g_min - g_cont). Negative = under-grasp.
// Throws InputError when g_min <= g_cont.
double overgrasp(double g_cont, double g_min, double g_slip);

// ---------------------------------------------------------------------------
// Application scenarios.

enum class Outcome { kCaught, kDropped, kFalsePositive, kLifted, kCrushedNotModeled };

std::string to_string(Outcome o);

struct ScenarioResult {
    Outcome outcome = Outcome::kCaught;
    double slip_distance_mm = 0.0;
    std::vector<std::int64_t> trigger_t_ms;
    std::vector<DecisionRecord> decisions;
    LabeledRun run;  // the frames the detector saw, in the standard run format
    int slips_detected = 0;
    double g_cont = 0.0;
    double g_slip = 0.0;
    double g_min = 0.0;
    std::optional<double> overgrasp_ratio;
};

struct DestabiliseConfig {
    SensorNoiseProfile noise{};
    std::array<double, 3> load_shares{0.5, 0.25, 0.25};
    StrategyConfig strategy{2, 2, 50, 100};
    double initial_mass_g = 120.0;
    double mass_ramp_g_s = 20.0;
    double duration_s = 8.0;
    double grip_margin = 1.15;       // initial capacity over initial weight
    double response_step = 0.02;     // grip added per trigger
    double grip_rate_per_s = 0.8;    // actuator slew rate
    double drop_limit_mm = 100.0;
    double deform_gain_px = 30.0;    // pin spread per unit of extra squeeze
    double start_height_mm = 120.0;
    double friction_mu = 0.6;
    double grip_gain_n = 12.0;
    double contact_grip = 0.08;
    double momentum_factor = 1.2;
};

// Object held in the air while its mass ramps up; each fusion trigger adds
// response_step of grip. Caught means it never fell past the drop limit.
ScenarioResult scenario_destabilise(const ClassifierModel& model,
                                    const DestabiliseConfig& config, std::uint64_t seed);

struct FirstGraspConfig {
    SensorNoiseProfile noise{};
    std::array<double, 3> load_shares{1.0 / 3, 1.0 / 3, 1.0 / 3};
    double mass_g = 200.0;
    double deformation_threshold_px = 0.5;
    double grip_step = 0.01;        // grip added per detected slip
    double response_delay_s = 0.1;  // refractory after a response
    double lift_speed_mm_s = 17.0;
    double close_rate_per_frame = 0.002;
    double grip_rate_per_s = 0.8;
    double deform_gain_px = 30.0;
    double lift_success_mm = 20.0;
    double max_duration_s = 25.0;
    double lift_accel_m_s2 = 0.0;   // margin used when computing g_min
    double friction_mu = 0.6;
    double grip_gain_n = 12.0;
    double contact_grip = 0.08;
    double momentum_factor = 1.2;
};

// Close until the mean sensor deformation reaches the threshold, then lift;
// every detected slip (single frame, single sensor) tightens the grip by
// grip_step with a refractory delay, until the object rises with the hand.
ScenarioResult scenario_first_grasp(const ClassifierModel& model,
                                    const FirstGraspConfig& config, std::uint64_t seed);

}  // namespace tacslip
