#pragma once

#include "tacslip/types.hpp"

namespace tacslip {

// Wrap an angle into (-pi, pi].
double wrap_angle(double a);

// Element-wise pin displacement cur - prev, pixels per frame.
// Throws InputError on sensor mismatch or non-increasing timestamps.
VelocityField compute_velocities(const PinFrame& prev, const PinFrame& cur);

// Cartesian to polar, dr = hypot(dx, dy), dtheta = atan2(dy, dx).
// The zero vector maps to (0, 0).
PolarField to_polar(const VelocityField& dxy);

// Subtract the circular mean direction from every angle with motion and
// re-wrap into (-pi, pi]. Pins with zero radius carry no direction: they
// neither contribute to the mean nor get shifted. If the resultant of the
// contributing unit vectors is shorter than 1e-9 the mean is undefined and
// the input is returned unchanged.
std::array<double, kPinCount> center_angles(const std::array<double, kPinCount>& thetas,
                                            const std::array<double, kPinCount>& radii);

// Norm of the mean velocity vector: sqrt((mean dx)^2 + (mean dy)^2).
double mean_velocity_norm(const VelocityField& dxy);

// compute_velocities -> to_polar -> center_angles, packaged.
PinVelocityFrame velocity_frame(const PinFrame& prev, const PinFrame& cur);

// Full pipeline to the 60-dimensional sample [dr..., dtheta...].
FeatureSample featurize(const PinFrame& prev, const PinFrame& cur);

// Mean per-pin displacement between a reference frame and a later frame,
// in pixels. Throws InputError on sensor mismatch.
double deformation(const PinFrame& frame0, const PinFrame& frame_t);

}  // namespace tacslip
