#include "tacslip/features.hpp"

#include <cmath>

#include "tacslip/errors.hpp"

namespace tacslip {

double wrap_angle(double a) {
    double r = std::fmod(a, 2.0 * M_PI);
    if (r <= -M_PI) {
        r += 2.0 * M_PI;
    } else if (r > M_PI) {
        r -= 2.0 * M_PI;
    }
    return r;
}

VelocityField compute_velocities(const PinFrame& prev, const PinFrame& cur) {
    if (prev.sensor_id != cur.sensor_id) {
        throw InputError("compute_velocities: frames from different sensors");
    }
    if (cur.t_ms <= prev.t_ms) {
        throw InputError("compute_velocities: timestamps must strictly increase");
    }
    VelocityField out;
    for (int i = 0; i < kPinCount; ++i) {
        out[i].x = cur.pins[i].x - prev.pins[i].x;
        out[i].y = cur.pins[i].y - prev.pins[i].y;
    }
    return out;
}

PolarField to_polar(const VelocityField& dxy) {
    PolarField out;
    for (int i = 0; i < kPinCount; ++i) {
        const double dx = dxy[i].x;
        const double dy = dxy[i].y;
        out[i].r = std::hypot(dx, dy);
        out[i].theta = (out[i].r == 0.0) ? 0.0 : std::atan2(dy, dx);
    }
    return out;
}

std::array<double, kPinCount> center_angles(const std::array<double, kPinCount>& thetas,
                                            const std::array<double, kPinCount>& radii) {
    double sx = 0.0;
    double sy = 0.0;
    for (int i = 0; i < kPinCount; ++i) {
        if (radii[i] > 0.0) {
            sx += std::cos(thetas[i]);
            sy += std::sin(thetas[i]);
        }
    }
    if (std::hypot(sx, sy) < 1e-9) {
        return thetas;  // mean direction undefined
    }
    const double mean = std::atan2(sy, sx);
    std::array<double, kPinCount> out;
    for (int i = 0; i < kPinCount; ++i) {
        out[i] = (radii[i] > 0.0) ? wrap_angle(thetas[i] - mean) : thetas[i];
    }
    return out;
}

double mean_velocity_norm(const VelocityField& dxy) {
    double mx = 0.0;
    double my = 0.0;
    for (const Vec2& v : dxy) {
        mx += v.x;
        my += v.y;
    }
    mx /= kPinCount;
    my /= kPinCount;
    return std::hypot(mx, my);
}

PinVelocityFrame velocity_frame(const PinFrame& prev, const PinFrame& cur) {
    PinVelocityFrame out;
    out.dxy = compute_velocities(prev, cur);
    out.polar = to_polar(out.dxy);

    std::array<double, kPinCount> thetas;
    std::array<double, kPinCount> radii;
    for (int i = 0; i < kPinCount; ++i) {
        thetas[i] = out.polar[i].theta;
        radii[i] = out.polar[i].r;
    }
    const std::array<double, kPinCount> centered = center_angles(thetas, radii);
    for (int i = 0; i < kPinCount; ++i) {
        out.polar[i].theta = centered[i];
    }
    return out;
}

FeatureSample featurize(const PinFrame& prev, const PinFrame& cur) {
    const PinVelocityFrame vf = velocity_frame(prev, cur);
    FeatureSample s;
    for (int i = 0; i < kPinCount; ++i) {
        s.features[i] = vf.polar[i].r;
        s.features[kPinCount + i] = vf.polar[i].theta;
    }
    s.sensor_id = cur.sensor_id;
    s.t_ms = cur.t_ms;
    s.mean_speed = mean_velocity_norm(vf.dxy);
    return s;
}

double deformation(const PinFrame& frame0, const PinFrame& frame_t) {
    if (frame0.sensor_id != frame_t.sensor_id) {
        throw InputError("deformation: frames from different sensors");
    }
    double sum = 0.0;
    for (int i = 0; i < kPinCount; ++i) {
        sum += std::hypot(frame_t.pins[i].x - frame0.pins[i].x,
                          frame_t.pins[i].y - frame0.pins[i].y);
    }
    return sum / kPinCount;
}

}  // namespace tacslip
