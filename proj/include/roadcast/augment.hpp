#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "roadcast/geo.hpp"
#include "roadcast/ingest.hpp"

namespace roadcast::augment {

// ---------------------------------------------------------------- closure --

enum class ClosureType { RoadClosure, LaneClosure, NoClosure };

const char* to_string(ClosureType c);
std::optional<ClosureType> closure_from_string(const std::string& s);

/// Classifies a free-text description against the fixed pattern set
/// (4 road-closure patterns checked before 10 lane-closure patterns, first
/// match wins). Matching is case-insensitive over words; a trailing '*' in a
/// pattern token is a prefix wildcard and a bare '*' matches any possibly
/// empty run of words.
ClosureType annotate_closure(const std::string& description);

// ---------------------------------------------------------------- weather --

enum class WeatherCondition { Clear, Snow, Rain, Fog, Hail, Thunderstorm };

const char* to_string(WeatherCondition c);
std::optional<WeatherCondition> condition_from_string(const std::string& s);

struct WeatherObservation {
    std::string station_id;
    double station_lat = 0.0;
    double station_lng = 0.0;
    std::int64_t time = 0;
    double temperature_f = 0.0;
    std::optional<double> wind_chill_f;
    double humidity_pct = 0.0;  // 0..100
    double pressure_inhg = 0.0;
    double visibility_mi = 0.0;
    std::string wind_direction;
    double wind_speed_mph = 0.0;
    double precipitation_mm = 0.0;  // >= 0
    WeatherCondition condition = WeatherCondition::Clear;
};

/// Station-major view over a flat observation list. Observations are sorted
/// by time within each station; stations sorted by id.
class WeatherTable {
public:
    explicit WeatherTable(std::vector<WeatherObservation> observations);

    bool empty() const { return stations_.empty(); }

    /// Nearest station by haversine (ties: smaller station_id), then its
    /// observation closest in time to `when` (ties: earlier observation).
    /// nullopt when the table is empty.
    std::optional<WeatherObservation> snapshot(double lat, double lng, std::int64_t when) const;

private:
    struct Station {
        std::string id;
        double lat, lng;
        std::vector<std::size_t> obs;  // indices into observations_, time-sorted
    };
    std::vector<WeatherObservation> observations_;
    std::vector<Station> stations_;
};

// -------------------------------------------------------------------- POI --

inline constexpr int kPoiTagCount = 15;

/// Closed tag set; index order is the feature-vector order.
enum class PoiTag {
    Amenity, Bump, Crossing, Junction, NoExit, Railway, Roundabout, Station,
    Stop, TrafficCalming, TrafficSignal, TurningLoop, Entrance, GiveWay,
    TurningCircle
};

const char* to_string(PoiTag t);
std::optional<PoiTag> poi_tag_from_string(const std::string& s);

struct PoiRecord {
    double lat = 0.0;
    double lng = 0.0;
    PoiTag tag = PoiTag::Amenity;
};

class PoiSet {
public:
    explicit PoiSet(std::vector<PoiRecord> pois);

    /// Flag k true iff some POI tagged k lies within tau_m of (lat, lng).
    std::array<bool, kPoiTagCount> flags_near(double lat, double lng, double tau_m) const;

    const std::vector<PoiRecord>& records() const { return pois_; }

private:
    std::vector<PoiRecord> pois_;
    geo::PointIndex index_;
};

// ------------------------------------------------------------- road class --

inline constexpr int kRoadClassCount = 25;

/// OSM highway classes, priority order for frequency ties (smaller ordinal
/// wins). The last entry doubles as the unresolved fallback.
enum class RoadClass {
    Motorway, Trunk, Primary, Secondary, Tertiary, Residential, Service,
    MotorwayLink, TrunkLink, PrimaryLink, SecondaryLink, TertiaryLink,
    Unclassified, LivingStreet, Pedestrian, Track, Busway, Footway, Bridleway,
    Steps, Path, Cycleway, Construction, Road, Other
};

const char* to_string(RoadClass c);
std::optional<RoadClass> road_class_from_string(const std::string& s);

/// Free-flow fallback when no matched way declares a maxspeed, in mph.
double class_default_speed_mph(RoadClass c);

struct RoadNode {
    std::int64_t node_id = 0;
    double lat = 0.0;
    double lng = 0.0;
};

struct RoadWay {
    std::int64_t way_id = 0;
    RoadClass road_class = RoadClass::Other;
    std::optional<double> maxspeed_mph;
    std::vector<std::int64_t> node_ids;  // >= 2
};

struct RoadMatchConfig {
    int s_nearest = 10;
    double distance_m = 50.0;
};

/// Node/way lookup structure for per-event road matching.
class RoadNetwork {
public:
    RoadNetwork(std::vector<RoadNode> nodes, std::vector<RoadWay> ways);

    struct Match {
        RoadClass road_class = RoadClass::Other;
        bool resolved = false;
        std::vector<std::size_t> way_indices;  // matched ways, ascending
    };

    /// Road class for a start point and optional end point: the S nearest
    /// nodes to each (within distance_m), the ways containing any survivor,
    /// most frequent class with ties by enum priority.
    Match match(double start_lat, double start_lng, std::optional<double> end_lat,
                std::optional<double> end_lng, const RoadMatchConfig& cfg) const;

    const std::vector<RoadWay>& ways() const { return ways_; }
    const std::vector<RoadNode>& nodes() const { return nodes_; }

private:
    std::vector<RoadNode> nodes_;
    std::vector<RoadWay> ways_;
    geo::PointIndex node_index_;
    std::vector<std::vector<std::size_t>> ways_of_node_;  // parallel to nodes_
};

/// Mean declared maxspeed over the matched ways; class-default fallback when
/// none declares one. Always positive.
double infer_avg_speed(const RoadNetwork& network, const RoadNetwork::Match& match);

// ---------------------------------------------------------------- records --

struct AugmentedEvent {
    ingest::RawEvent raw;
    ClosureType closure = ClosureType::NoClosure;
    std::optional<WeatherObservation> weather;
    std::array<bool, kPoiTagCount> poi_flags{};
    std::array<bool, 4> daylight{};  // sunrise/sunset, civil, nautical, astronomical
    RoadClass road_class = RoadClass::Other;
    bool road_class_resolved = false;
    double avg_speed_mph = 0.0;
    double travel_time_min = 0.0;  // distance / avg_speed when distance known
};

struct AugmentConfig {
    double poi_tau_m = 30.0;
    RoadMatchConfig road_match;
};

/// Applies every augmentation step to one event against prebuilt reference
/// structures. Pure; callers may fan events out across threads.
AugmentedEvent augment_event(const ingest::RawEvent& event, const WeatherTable& weather,
                             const PoiSet& pois, const RoadNetwork& network,
                             const AugmentConfig& cfg);

// ------------------------------------------------------- reference file IO --

std::vector<WeatherObservation> load_weather_csv(std::istream& in);
std::vector<PoiRecord> load_poi_csv(std::istream& in);
std::vector<RoadNode> load_nodes_csv(std::istream& in);
std::vector<RoadWay> load_ways_csv(std::istream& in);

/// augmented.csv round-trip used between the augment and downstream stages.
void write_augmented_csv(std::ostream& out, const std::vector<AugmentedEvent>& events);
std::vector<AugmentedEvent> read_augmented_csv(std::istream& in);

}  // namespace roadcast::augment
