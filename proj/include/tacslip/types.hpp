#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace tacslip {

inline constexpr int kPinCount = 30;
inline constexpr int kFeatureDim = 2 * kPinCount;

// Bumped whenever the feature layout changes. Stored in model files so a
// model is never applied to features it was not trained on.
inline constexpr const char* kFeatureLayout = "dr30-dtheta30/v1";

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct PolarVec {
    double r = 0.0;      // >= 0, pixels per frame
    double theta = 0.0;  // radians in (-pi, pi]
};

using PinArray = std::array<Vec2, kPinCount>;
using VelocityField = std::array<Vec2, kPinCount>;
using PolarField = std::array<PolarVec, kPinCount>;

enum class Label : int { kStatic = 0, kSlip = 1 };

// One sensor's pin snapshot. Pin order is stable across frames of the same
// sensor: pin i at time t corresponds to pin i at time t-1.
struct PinFrame {
    std::int64_t t_ms = 0;
    int sensor_id = 0;
    PinArray pins{};
};

struct PinVelocityFrame {
    VelocityField dxy{};
    PolarField polar{};  // angles already centered
};

// The classifier input: [dr_1..dr_30, dtheta_1..dtheta_30].
struct FeatureSample {
    std::array<double, kFeatureDim> features{};
    std::optional<Label> label;  // absent for live frames
    int sensor_id = 0;
    std::int64_t t_ms = 0;
    // Norm of the mean pin velocity of the underlying frame pair. The
    // threshold classifier decides on this scalar, which cannot be
    // reconstructed from the direction-centered features.
    double mean_speed = 0.0;
};

struct Prediction {
    Label label = Label::kStatic;
    double score = 0.0;  // slip iff score >= 0, including the boundary
};

inline bool is_slip(const Prediction& p) { return p.label == Label::kSlip; }

}  // namespace tacslip
