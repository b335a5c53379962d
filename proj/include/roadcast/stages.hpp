#pragma once

#include <string>
#include <vector>

#include "roadcast/config.hpp"
#include "roadcast/eval.hpp"
#include "roadcast/synth.hpp"

namespace roadcast::stages {

/// Pipeline stages as library calls; the CLI is a thin wrapper. Each stage
/// reads the previous stage's files and writes its own idempotently.
/// ValidationError signals a bad config or missing upstream artifact.

synth::SynthSummary run_synth(const config::RunConfig& cfg);

struct IngestSummary {
    std::size_t rows_ok = 0;
    std::size_t rows_bad = 0;
    std::size_t after_dedup = 0;
};
IngestSummary run_ingest(const config::RunConfig& cfg);

std::size_t run_augment(const config::RunConfig& cfg);  // events written

struct FeaturesSummary {
    std::size_t cells = 0;
    int intervals = 0;
    std::size_t records = 0;
};
FeaturesSummary run_features(const config::RunConfig& cfg);

struct TilesSummary {
    std::size_t tiles = 0;
    bool covers_cell = true;  // when false a coverage warning was emitted
};
TilesSummary run_tiles(const config::RunConfig& cfg);

struct TrainSummary {
    std::vector<std::string> checkpoints;
    std::vector<models::TrainResult> results;
};
TrainSummary run_train(const config::RunConfig& cfg);

/// Loads checkpoints, evaluates the scenario's test split, writes
/// metrics.txt / metrics.csv, and returns the rows.
std::vector<std::pair<std::string, eval::Metrics>> run_evaluate(const config::RunConfig& cfg);

std::size_t run_predict(const config::RunConfig& cfg);  // rows written

eval::DatasetStats run_stats(const config::RunConfig& cfg);

std::size_t run_export_map(const config::RunConfig& cfg);  // files written

/// In-memory view shared by train/evaluate/predict.
struct LoadedData {
    features::FeatureStore store;
    std::vector<features::SampleWindow> windows;
    features::SplitWindows splits;
    std::vector<grid::HexCell> cells;
    std::map<grid::HexCell, tiles::Tile> tiles;
    models::Dataset dataset;  // points at splits/tiles/norm above
};

/// Loads the feature store and tiles, builds windows and the configured
/// scenario's splits. Throws ValidationError when artifacts are missing.
LoadedData load_data(const config::RunConfig& cfg);

}  // namespace roadcast::stages
