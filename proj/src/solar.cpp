#include "roadcast/solar.hpp"

#include <cmath>

namespace roadcast::solar {

namespace {
constexpr double kPi = 3.14159265358979323846;
double rad(double d) { return d * kPi / 180.0; }
double deg(double r) { return r * 180.0 / kPi; }
}  // namespace

double altitude_deg(double lat, double lng, std::int64_t unix_sec) {
    const double jd = static_cast<double>(unix_sec) / 86400.0 + 2440587.5;
    const double t = (jd - 2451545.0) / 36525.0;  // Julian centuries from J2000

    const double l0 = std::fmod(280.46646 + t * (36000.76983 + 0.0003032 * t), 360.0);
    const double m = 357.52911 + t * (35999.05029 - 0.0001537 * t);
    const double ecc = 0.016708634 - t * (0.000042037 + 0.0000001267 * t);
    const double c = std::sin(rad(m)) * (1.914602 - t * (0.004817 + 0.000014 * t)) +
                     std::sin(rad(2 * m)) * (0.019993 - 0.000101 * t) +
                     std::sin(rad(3 * m)) * 0.000289;
    const double true_lng = l0 + c;
    const double omega = 125.04 - 1934.136 * t;
    const double app_lng = true_lng - 0.00569 - 0.00478 * std::sin(rad(omega));

    const double eps0 =
        23.0 + (26.0 + (21.448 - t * (46.8150 + t * (0.00059 - t * 0.001813))) / 60.0) / 60.0;
    const double eps = eps0 + 0.00256 * std::cos(rad(omega));

    const double decl = std::asin(std::sin(rad(eps)) * std::sin(rad(app_lng)));

    double y = std::tan(rad(eps) / 2.0);
    y *= y;
    const double eot_min =
        4.0 * deg(y * std::sin(2 * rad(l0)) - 2 * ecc * std::sin(rad(m)) +
                  4 * ecc * y * std::sin(rad(m)) * std::cos(2 * rad(l0)) -
                  0.5 * y * y * std::sin(4 * rad(l0)) - 1.25 * ecc * ecc * std::sin(2 * rad(m)));

    std::int64_t sec_of_day = unix_sec % 86400;
    if (sec_of_day < 0) sec_of_day += 86400;
    const double true_solar_min =
        std::fmod(static_cast<double>(sec_of_day) / 60.0 + eot_min + 4.0 * lng + 1440.0 * 4, 1440.0);
    const double hour_angle = true_solar_min / 4.0 - 180.0;

    const double sin_alt = std::sin(rad(lat)) * std::sin(decl) +
                           std::cos(rad(lat)) * std::cos(decl) * std::cos(rad(hour_angle));
    return deg(std::asin(std::max(-1.0, std::min(1.0, sin_alt))));
}

std::array<bool, 4> period_of_day(double lat, double lng, std::int64_t unix_sec) {
    const double alt = altitude_deg(lat, lng, unix_sec);
    return {alt > kSunriseThresholdDeg, alt > kCivilThresholdDeg, alt > kNauticalThresholdDeg,
            alt > kAstronomicalThresholdDeg};
}

}  // namespace roadcast::solar
