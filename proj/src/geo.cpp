#include "roadcast/geo.hpp"

#include <algorithm>

namespace roadcast::geo {

std::vector<std::pair<std::size_t, double>> PointIndex::nearest_within(double lat, double lng,
                                                                       std::size_t k,
                                                                       double max_radius_m) const {
    auto hits = within(lat, lng, max_radius_m);
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

}  // namespace roadcast::geo
