#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "roadcast/geo.hpp"

namespace roadcast::grid {

/// Anchors the hex lattice and the 15-day interval clock.
struct GridConfig {
    double origin_lat = 0.0;
    double origin_lng = 0.0;
    double hex_area_km2 = 5.16;
    std::int64_t epoch_start = 1454284800;  // 2016-02-01T00:00:00Z
    int interval_days = 15;

    /// Edge length of a regular hexagon with the configured area, meters.
    double edge_m() const;
};

/// Axial coordinates on a flat-top hexagonal lattice.
struct HexCell {
    int q = 0;
    int r = 0;
    bool operator==(const HexCell&) const = default;
    bool operator<(const HexCell& o) const { return q != o.q ? q < o.q : r < o.r; }
};

struct HexCellHash {
    std::size_t operator()(const HexCell& c) const {
        return std::hash<std::uint64_t>()((static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.q)) << 32) |
                                          static_cast<std::uint32_t>(c.r));
    }
};

std::string cell_id(const HexCell& c);               // "q:r"
std::optional<HexCell> cell_from_id(const std::string& id);

struct IntervalIndex {
    int index = 0;
    bool operator==(const IntervalIndex&) const = default;
};

/// Equirectangular projection about the grid origin: x east, y north, meters.
geo::LatLng unproject(const GridConfig& cfg, double x, double y);
void project(const GridConfig& cfg, double lat, double lng, double& x, double& y);

/// Points farther than this from the origin (in either axis, degrees) are
/// outside the projection's validity window.
inline constexpr double kDomainWindowDeg = 5.0;
bool in_domain(const GridConfig& cfg, double lat, double lng);

/// Cell containing a point. Throws std::domain_error outside the validity
/// window. Cube rounding makes boundary assignment deterministic.
HexCell locate(const GridConfig& cfg, double lat, double lng);

geo::LatLng cell_center(const GridConfig& cfg, const HexCell& cell);

/// Six vertices, counter-clockwise, not closed (callers repeat the first
/// vertex when a serialization wants a closed ring).
std::array<geo::LatLng, 6> cell_polygon(const GridConfig& cfg, const HexCell& cell);

/// 15-day slot of a timestamp. Throws std::domain_error before the epoch.
IntervalIndex interval_of(const GridConfig& cfg, std::int64_t unix_sec);

/// Start timestamp of an interval.
std::int64_t interval_start(const GridConfig& cfg, IntervalIndex t);

}  // namespace roadcast::grid
