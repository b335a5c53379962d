#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "roadcast/augment.hpp"
#include "roadcast/grid.hpp"

namespace roadcast::features {

inline constexpr int kDim = 59;
inline constexpr int kWeatherOffset = 0;    // temperature, humidity, 12 indicators
inline constexpr int kPoiOffset = 14;       // 15 POI frequencies
inline constexpr int kRoadTypeOffset = 29;  // 25-way one-hot average
inline constexpr int kRoadInfoOffset = 54;  // distance, avg_speed, travel_time,
                                            // traffic_impacted, severity
inline constexpr int kHistory = 10;

/// Names for the 59 dimensions, in storage order.
const std::array<std::string, kDim>& dimension_names();

struct FeatureVector {
    std::array<float, kDim> values{};
};

using Label = std::uint8_t;  // 1 iff at least one event in (cell, interval)

/// Per-event weather indicator mapping. Rain/snow intensity splits at 2.5 mm
/// (light) and 7.6 mm (moderate); severe_cold at <= -10 F; fog severity by
/// visibility (< 0.5 mi severe, < 2 mi moderate); precipitation_other is
/// positive precipitation under a clear sky.
std::array<float, 12> weather_indicators(const augment::WeatherObservation& w);

/// Aggregates one (cell, interval): means of per-event weather, road one-hots
/// and road info; POI dims are the static per-cell counts. An empty interval
/// keeps the POI counts and zeroes everything else, label 0.
std::pair<FeatureVector, Label> aggregate(const std::vector<const augment::AugmentedEvent*>& events,
                                          const std::array<float, augment::kPoiTagCount>& poi_counts);

// ------------------------------------------------------------------ store --

/// Feature vectors for one cell over a contiguous interval range.
struct CellSeries {
    grid::HexCell cell;
    int first_interval = 0;
    std::vector<FeatureVector> vectors;  // one per interval
    std::vector<Label> labels;
};

struct NormStats {
    std::array<float, kDim> min{};
    std::array<float, kDim> max{};
};

/// (x - min) / (max - min) clamped to [0,1]; constant dims map to 0.
FeatureVector normalize(const NormStats& stats, const FeatureVector& v);

struct FeatureStore {
    grid::GridConfig grid;
    int first_interval = 0;
    int interval_count = 0;
    std::vector<CellSeries> series;  // sorted by cell
    NormStats norm;                  // computed on the training date range
};

/// Builds the store from augmented events: locates each event, aggregates
/// every (cell, interval) over [min interval, max interval] across all
/// events, counts per-cell POIs, and fits NormStats on vectors whose interval
/// start date is within the training range.
FeatureStore build_store(const std::vector<augment::AugmentedEvent>& events,
                         const std::vector<augment::PoiRecord>& pois,
                         const grid::GridConfig& grid_cfg);

/// Binary store: features.bin records are int32 q, int32 r, int32 interval,
/// 59 float32, uint8 label (all little-endian); the JSON sidecar carries the
/// layout, grid config, and NormStats.
void save_store(const FeatureStore& store, const std::string& bin_path,
                const std::string& json_path);
FeatureStore load_store(const std::string& bin_path, const std::string& json_path);

// ---------------------------------------------------------------- windows --

struct SampleWindow {
    grid::HexCell cell;
    int target_interval = 0;
    std::array<FeatureVector, kHistory> history;  // intervals target-10 .. target-1
    Label label = 0;
};

/// One window per target with kHistory predecessors present in the series.
std::vector<SampleWindow> build_windows(const CellSeries& series);
std::vector<SampleWindow> build_windows(const FeatureStore& store);

// ----------------------------------------------------------------- splits --

enum class Split { Train, Val, Test, None };

/// Scenario I temporal split by the target interval's start date:
/// train [2016-02-01, 2019-12-31], val [2020-01-01, 2020-05-31],
/// test [2020-06-01, 2020-12-31].
Split temporal_split_of(const grid::GridConfig& cfg, int target_interval);

struct SplitWindows {
    std::vector<SampleWindow> train, val, test;
};

SplitWindows temporal_split(const grid::GridConfig& cfg, const std::vector<SampleWindow>& windows);

/// Scenario II: 60/20/20 partition of cells, largest-remainder rounding with
/// ties resolved train > val > test, deterministic under seed.
struct CellSplit {
    std::vector<grid::HexCell> train, val, test;
};

CellSplit spatial_split(std::vector<grid::HexCell> cells, std::uint64_t seed);

SplitWindows split_by_cells(const CellSplit& cells, const std::vector<SampleWindow>& windows);

}  // namespace roadcast::features
