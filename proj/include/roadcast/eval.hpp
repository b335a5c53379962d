#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "roadcast/augment.hpp"
#include "roadcast/features.hpp"
#include "roadcast/models.hpp"

namespace roadcast::eval {

struct Metrics {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    double precision = 0.0;  // positive class
    double recall = 0.0;
    double f1 = 0.0;
};

/// Confusion counts and derived scores at the given threshold (label 1 when
/// p >= threshold). Degenerate denominators yield 0. Throws on empty input.
Metrics compute_metrics(const std::vector<float>& probs, const std::vector<int>& labels,
                        double threshold = 0.5);

/// Macro-averaged F1 over both classes, available behind a flag in the CLI.
double macro_f1(const std::vector<float>& probs, const std::vector<int>& labels,
                double threshold = 0.5);

std::string metrics_table(const std::vector<std::pair<std::string, Metrics>>& rows);
std::string metrics_csv(const std::vector<std::pair<std::string, Metrics>>& rows);

// ------------------------------------------------------------- statistics --

struct DatasetStats {
    std::int64_t total = 0;
    std::array<std::int64_t, 12> monthly_starts{};
    std::array<std::int64_t, 12> monthly_ends{};  // events with end_time only
    std::map<std::string, std::int64_t> closure_counts;
    std::map<std::string, std::int64_t> road_class_counts;
    std::map<std::string, std::int64_t> poi_counts;  // events flagged per tag
    // duration buckets; events without end_time are counted as unknown
    std::int64_t duration_unknown = 0;
    std::int64_t short_term = 0;   // < 24 h
    std::int64_t medium_term = 0;  // 24 h .. < 15 d
    std::int64_t long_term = 0;    // >= 15 d
    std::map<std::string, std::int64_t> duration_fine;  // labelled fine bins
    std::array<std::int64_t, 4> daylight_day_counts{};  // per twilight system
    std::map<std::string, std::int64_t> state_counts;   // pass-through column
    std::map<std::string, std::int64_t> city_counts;
};

DatasetStats compute_dataset_stats(const std::vector<augment::AugmentedEvent>& events);

std::string stats_json(const DatasetStats& s);
std::string stats_text(const DatasetStats& s);

// ---------------------------------------------------------------- geojson --

struct CellPrediction {
    grid::HexCell cell;
    int predicted = 0;            // 0|1
    std::optional<int> actual;    // empty in pure-forecast mode
};

/// RFC 7946 FeatureCollection: one hexagon polygon per cell, properties
/// cell_id, interval_index, predicted, actual (null when unknown) and color
/// ("green" for predicted 0, "red" for 1).
std::string export_geojson(const grid::GridConfig& cfg, int interval_index,
                           const std::vector<CellPrediction>& predictions);

// -------------------------------------------------------------- scenarios --

struct ScenarioRow {
    std::string model;
    Metrics metrics;
};

struct ScenarioResult {
    std::vector<ScenarioRow> rows;
    std::vector<models::TrainResult> histories;
};

/// Scenario I: temporal split, trains each requested model, reports test
/// metrics. Trained models are returned through `out_models` for persistence.
ScenarioResult run_scenario1(const features::SplitWindows& splits, const models::Dataset& data,
                             const std::vector<models::ModelKind>& kinds,
                             const models::DrcpConfig& drcp_cfg, const models::TrainConfig& tc,
                             std::vector<std::unique_ptr<models::Model>>* out_models = nullptr);

/// Scenario II: 60/20/20 zone split of the windows (train/val/test by cell),
/// trains one DRCP, reports held-out-zone metrics.
ScenarioResult run_scenario2(const std::vector<features::SampleWindow>& windows,
                             const std::vector<grid::HexCell>& cells, const models::Dataset& base,
                             const models::DrcpConfig& drcp_cfg, const models::TrainConfig& tc,
                             std::uint64_t seed,
                             std::vector<std::unique_ptr<models::Model>>* out_models = nullptr);

}  // namespace roadcast::eval
