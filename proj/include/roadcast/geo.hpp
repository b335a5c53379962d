#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace roadcast::geo {

// All great-circle math in this project uses a spherical Earth of this radius.
inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Haversine great-circle distance in meters.
inline double haversine_m(double lat1, double lng1, double lat2, double lng2) {
    const double phi1 = deg2rad(lat1);
    const double phi2 = deg2rad(lat2);
    const double dphi = deg2rad(lat2 - lat1);
    const double dlmb = deg2rad(lng2 - lng1);
    const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlmb / 2) * std::sin(dlmb / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

struct LatLng {
    double lat = 0.0;
    double lng = 0.0;
};

/// Bucketed point index for radius queries over lat/lng points.
/// Buckets are sized in degrees; a query scans every bucket overlapping the
/// radius bounding box and filters by haversine. Latitudes beyond +-85 are
/// outside this project's domain and are not handled specially.
class PointIndex {
public:
    explicit PointIndex(double bucket_deg = 0.01) : bucket_deg_(bucket_deg) {}

    void add(double lat, double lng, std::size_t payload) {
        points_.push_back({lat, lng, payload});
        buckets_[key(lat, lng)].push_back(points_.size() - 1);
    }

    std::size_t size() const { return points_.size(); }

    /// Indices of payloads within radius_m of (lat, lng), unordered.
    std::vector<std::pair<std::size_t, double>> within(double lat, double lng, double radius_m) const {
        std::vector<std::pair<std::size_t, double>> hits;
        const double lat_pad = rad2deg(radius_m / kEarthRadiusM);
        const double cos_lat = std::max(0.01, std::cos(deg2rad(lat)));
        const double lng_pad = lat_pad / cos_lat;
        const std::int64_t lo_i = cell_of(lat - lat_pad);
        const std::int64_t hi_i = cell_of(lat + lat_pad);
        const std::int64_t lo_j = cell_of(lng - lng_pad);
        const std::int64_t hi_j = cell_of(lng + lng_pad);
        for (std::int64_t i = lo_i; i <= hi_i; ++i) {
            for (std::int64_t j = lo_j; j <= hi_j; ++j) {
                auto it = buckets_.find((static_cast<std::uint64_t>(i) << 32) ^
                                        static_cast<std::uint32_t>(j));
                if (it == buckets_.end()) continue;
                for (std::size_t idx : it->second) {
                    const auto& p = points_[idx];
                    const double d = haversine_m(lat, lng, p.lat, p.lng);
                    if (d <= radius_m) hits.push_back({p.payload, d});
                }
            }
        }
        return hits;
    }

    /// Up to k nearest payloads within max_radius_m, sorted by (distance, payload).
    std::vector<std::pair<std::size_t, double>> nearest_within(double lat, double lng, std::size_t k,
                                                               double max_radius_m) const;

private:
    struct Pt {
        double lat, lng;
        std::size_t payload;
    };

    std::int64_t cell_of(double deg) const {
        return static_cast<std::int64_t>(std::floor(deg / bucket_deg_));
    }
    std::uint64_t key(double lat, double lng) const {
        return (static_cast<std::uint64_t>(cell_of(lat)) << 32) ^
               static_cast<std::uint32_t>(cell_of(lng));
    }

    double bucket_deg_;
    std::vector<Pt> points_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

}  // namespace roadcast::geo
