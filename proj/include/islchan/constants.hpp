#pragma once

#include <numbers>

namespace islchan::constants {

inline constexpr double speed_of_light = 299'792'458.0;  // m/s, exact
inline constexpr double boltzmann = 1.380649e-23;         // J/K, exact (SI 2019)
inline constexpr double cmb_temperature = 2.7255;         // K
inline constexpr double cmb_temperature_sigma = 0.0006;   // K
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double deg_to_rad(double deg) noexcept { return deg * pi / 180.0; }
inline constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / pi; }

}  // namespace islchan::constants
