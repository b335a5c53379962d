#pragma once

#include <array>
#include <cstdint>

namespace roadcast::solar {

/// Solar altitude above the horizon in degrees, NOAA low-accuracy series
/// (good to roughly 0.2 degrees away from the poles, plenty for day/night
/// labelling). No atmospheric refraction; the sunrise threshold below folds
/// the standard -0.833 degree correction in instead.
double altitude_deg(double lat, double lng, std::int64_t unix_sec);

/// Day/night under the four twilight systems, in order:
/// sunrise/sunset, civil, nautical, astronomical. true = day.
/// Thresholds: -0.833, -6, -12, -18 degrees of altitude.
std::array<bool, 4> period_of_day(double lat, double lng, std::int64_t unix_sec);

inline constexpr double kSunriseThresholdDeg = -0.833;
inline constexpr double kCivilThresholdDeg = -6.0;
inline constexpr double kNauticalThresholdDeg = -12.0;
inline constexpr double kAstronomicalThresholdDeg = -18.0;

}  // namespace roadcast::solar
