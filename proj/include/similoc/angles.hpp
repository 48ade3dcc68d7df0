#pragma once

#include <cmath>

namespace similoc {

inline constexpr double kPi = 3.14159265358979323846;

// Wraps an angle to (-pi, pi].
double wrap_angle(double rad);

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace similoc
