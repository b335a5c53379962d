#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "roadcast/augment.hpp"
#include "roadcast/grid.hpp"
#include "roadcast/ingest.hpp"
#include "roadcast/models.hpp"
#include "roadcast/synth.hpp"

namespace roadcast::config {

/// Input problems (bad config, missing upstream artifacts). The CLI maps
/// these to exit code 1; other exceptions become exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Paths {
    std::string events, weather, poi, nodes, ways;
    std::string output_dir = "out";
};

struct RunConfig {
    std::uint64_t seed = 0;
    Paths paths;
    grid::GridConfig grid;
    ingest::DedupConfig dedup;
    augment::AugmentConfig augment;
    int tile_size = 256;
    models::TrainConfig train;
    models::DrcpConfig drcp;
    std::vector<models::ModelKind> model_kinds = {models::ModelKind::Drcp,
                                                  models::ModelKind::LogisticRegression,
                                                  models::ModelKind::Mlp};
    int scenario = 1;  // 1 or 2
    bool report_macro_f1 = false;
    double threshold = 0.5;
    std::string predict_model = "drcp";
    synth::SynthConfig synth;

    // derived stage artifact locations
    std::string ingested_csv() const { return paths.output_dir + "/ingested.csv"; }
    std::string ingest_report() const { return paths.output_dir + "/ingest_report.json"; }
    std::string augmented_csv() const { return paths.output_dir + "/augmented.csv"; }
    std::string features_bin() const { return paths.output_dir + "/features.bin"; }
    std::string features_json() const { return paths.output_dir + "/features.json"; }
    std::string tiles_dir() const { return paths.output_dir + "/tiles"; }
    std::string run_dir() const { return paths.output_dir + "/run"; }
    std::string checkpoint(const std::string& kind) const {
        return run_dir() + "/" + kind + ".ckpt";
    }
    std::string metrics_txt() const { return paths.output_dir + "/metrics.txt"; }
    std::string metrics_csv_path() const { return paths.output_dir + "/metrics.csv"; }
    std::string predictions_csv() const { return paths.output_dir + "/predictions.csv"; }
    std::string stats_json_path() const { return paths.output_dir + "/stats.json"; }
    std::string stats_txt_path() const { return paths.output_dir + "/stats.txt"; }
    std::string maps_dir() const { return paths.output_dir + "/maps"; }
    std::string synth_manifest() const { return paths.output_dir + "/synth_manifest.json"; }
};

/// Loads a config JSON; unspecified fields keep their defaults, unknown keys
/// are rejected. Relative input paths default into <output_dir>/synth/.
RunConfig load_config(const std::string& path);
RunConfig config_from_json_text(const std::string& text);

/// Serialized form of the effective config (defaults applied).
std::string config_to_json(const RunConfig& cfg);

}  // namespace roadcast::config
