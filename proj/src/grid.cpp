#include "roadcast/grid.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace roadcast::grid {

using geo::deg2rad;
using geo::kEarthRadiusM;
using geo::rad2deg;

double GridConfig::edge_m() const {
    // area = 1.5 * sqrt(3) * a^2 for a regular hexagon
    return std::sqrt(hex_area_km2 * 1e6 / (1.5 * std::sqrt(3.0)));
}

std::string cell_id(const HexCell& c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%d:%d", c.q, c.r);
    return buf;
}

std::optional<HexCell> cell_from_id(const std::string& id) {
    HexCell c;
    char extra;
    if (std::sscanf(id.c_str(), "%d:%d%c", &c.q, &c.r, &extra) != 2) return std::nullopt;
    return c;
}

void project(const GridConfig& cfg, double lat, double lng, double& x, double& y) {
    x = kEarthRadiusM * deg2rad(lng - cfg.origin_lng) * std::cos(deg2rad(cfg.origin_lat));
    y = kEarthRadiusM * deg2rad(lat - cfg.origin_lat);
}

geo::LatLng unproject(const GridConfig& cfg, double x, double y) {
    geo::LatLng p;
    p.lat = cfg.origin_lat + rad2deg(y / kEarthRadiusM);
    p.lng = cfg.origin_lng + rad2deg(x / (kEarthRadiusM * std::cos(deg2rad(cfg.origin_lat))));
    return p;
}

bool in_domain(const GridConfig& cfg, double lat, double lng) {
    return std::abs(lat - cfg.origin_lat) <= kDomainWindowDeg &&
           std::abs(lng - cfg.origin_lng) <= kDomainWindowDeg;
}

HexCell locate(const GridConfig& cfg, double lat, double lng) {
    if (!in_domain(cfg, lat, lng))
        throw std::domain_error("point outside the grid's validity window: " +
                                std::to_string(lat) + "," + std::to_string(lng));
    double x, y;
    project(cfg, lat, lng, x, y);
    const double a = cfg.edge_m();
    // flat-top axial: x = 1.5 a q ; y = sqrt(3) a (r + q/2)
    const double qf = x * (2.0 / 3.0) / a;
    const double rf = (-x / 3.0 + y / std::sqrt(3.0)) / a;

    // cube rounding
    const double xf = qf, zf = rf, yf = -xf - zf;
    double rx = std::round(xf), ry = std::round(yf), rz = std::round(zf);
    const double dx = std::abs(rx - xf), dy = std::abs(ry - yf), dz = std::abs(rz - zf);
    if (dx > dy && dx > dz) rx = -ry - rz;
    else if (dy > dz) ry = -rx - rz;
    else rz = -rx - ry;
    return HexCell{static_cast<int>(rx), static_cast<int>(rz)};
}

geo::LatLng cell_center(const GridConfig& cfg, const HexCell& cell) {
    const double a = cfg.edge_m();
    const double x = 1.5 * a * cell.q;
    const double y = std::sqrt(3.0) * a * (cell.r + cell.q / 2.0);
    return unproject(cfg, x, y);
}

std::array<geo::LatLng, 6> cell_polygon(const GridConfig& cfg, const HexCell& cell) {
    const double a = cfg.edge_m();
    const double cx = 1.5 * a * cell.q;
    const double cy = std::sqrt(3.0) * a * (cell.r + cell.q / 2.0);
    std::array<geo::LatLng, 6> ring;
    for (int i = 0; i < 6; ++i) {
        const double ang = deg2rad(60.0 * i);  // counter-clockwise from due east
        ring[i] = unproject(cfg, cx + a * std::cos(ang), cy + a * std::sin(ang));
    }
    return ring;
}

IntervalIndex interval_of(const GridConfig& cfg, std::int64_t unix_sec) {
    if (unix_sec < cfg.epoch_start)
        throw std::domain_error("timestamp precedes the interval epoch");
    const std::int64_t len = static_cast<std::int64_t>(cfg.interval_days) * 86400;
    return IntervalIndex{static_cast<int>((unix_sec - cfg.epoch_start) / len)};
}

std::int64_t interval_start(const GridConfig& cfg, IntervalIndex t) {
    return cfg.epoch_start + static_cast<std::int64_t>(t.index) * cfg.interval_days * 86400;
}

}  // namespace roadcast::grid
