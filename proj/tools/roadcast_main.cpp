#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "roadcast/stages.hpp"

namespace {

using roadcast::config::RunConfig;

struct CommonOpts {
    std::string config_path;
    std::int64_t seed = -1;
    std::string stage_dir;
};

RunConfig effective_config(const CommonOpts& opts) {
    RunConfig cfg = roadcast::config::load_config(opts.config_path);
    if (opts.seed >= 0) {
        cfg.seed = static_cast<std::uint64_t>(opts.seed);
        cfg.train.seed = cfg.seed;
        cfg.synth.seed = cfg.seed;
    }
    if (!opts.stage_dir.empty()) {
        // re-resolve default paths against the overridden directory
        const std::string old_synth = cfg.paths.output_dir + "/synth/";
        auto redirect = [&](std::string& p) {
            if (p.rfind(old_synth, 0) == 0)
                p = opts.stage_dir + "/synth/" + p.substr(old_synth.size());
        };
        redirect(cfg.paths.events);
        redirect(cfg.paths.weather);
        redirect(cfg.paths.poi);
        redirect(cfg.paths.nodes);
        redirect(cfg.paths.ways);
        cfg.paths.output_dir = opts.stage_dir;
    }
    return cfg;
}

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "run configuration (JSON)")->required();
    sub->add_option("--seed", opts.seed, "override the config seed");
    sub->add_option("--stage-dir", opts.stage_dir, "override the output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"roadcast: construction-event pipeline, hex-grid features and DRCP training"};
    app.require_subcommand(1);
    CommonOpts opts;

    auto* s_synth = app.add_subcommand("synth", "generate the synthetic corpus");
    auto* s_ingest = app.add_subcommand("ingest", "parse and deduplicate raw events");
    auto* s_augment = app.add_subcommand("augment", "attach closure/weather/POI/daylight/road");
    auto* s_features = app.add_subcommand("features", "aggregate per-cell interval features");
    auto* s_tiles = app.add_subcommand("tiles", "rasterize road-network map tiles");
    auto* s_train = app.add_subcommand("train", "train the configured models");
    auto* s_eval = app.add_subcommand("evaluate", "evaluate checkpoints on the test split");
    auto* s_predict = app.add_subcommand("predict", "write per-window predictions");
    auto* s_stats = app.add_subcommand("stats", "dataset statistics from augmented events");
    auto* s_export = app.add_subcommand("export-map", "GeoJSON prediction maps per interval");
    for (auto* sub : {s_synth, s_ingest, s_augment, s_features, s_tiles, s_train, s_eval,
                      s_predict, s_stats, s_export})
        add_common(sub, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = effective_config(opts);
        namespace st = roadcast::stages;
        if (s_synth->parsed()) {
            const auto s = st::run_synth(cfg);
            std::cout << "synth: " << s.events_written << " events over " << s.cells
                      << " cells x " << s.intervals << " intervals (label rate "
                      << s.actual_rate << ", expected " << s.expected_rate << ")\n";
        } else if (s_ingest->parsed()) {
            const auto s = st::run_ingest(cfg);
            std::cout << "ingest: " << s.rows_ok << " rows parsed, " << s.rows_bad
                      << " rejected, " << s.after_dedup << " after dedup\n";
        } else if (s_augment->parsed()) {
            std::cout << "augment: " << st::run_augment(cfg) << " events annotated\n";
        } else if (s_features->parsed()) {
            const auto s = st::run_features(cfg);
            std::cout << "features: " << s.records << " records over " << s.cells << " cells x "
                      << s.intervals << " intervals\n";
        } else if (s_tiles->parsed()) {
            const auto s = st::run_tiles(cfg);
            std::cout << "tiles: " << s.tiles << " rendered\n";
        } else if (s_train->parsed()) {
            const auto s = st::run_train(cfg);
            for (std::size_t i = 0; i < s.checkpoints.size(); ++i)
                std::cout << "train: " << s.checkpoints[i] << " (best epoch "
                          << s.results[i].best_epoch << ", val loss "
                          << s.results[i].best_val_loss << ")\n";
        } else if (s_eval->parsed()) {
            const auto rows = st::run_evaluate(cfg);
            std::cout << roadcast::eval::metrics_table(rows);
        } else if (s_predict->parsed()) {
            std::cout << "predict: " << st::run_predict(cfg) << " windows\n";
        } else if (s_stats->parsed()) {
            const auto s = st::run_stats(cfg);
            std::cout << roadcast::eval::stats_text(s);
        } else if (s_export->parsed()) {
            std::cout << "export-map: " << st::run_export_map(cfg) << " GeoJSON files\n";
        }
    } catch (const roadcast::config::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
