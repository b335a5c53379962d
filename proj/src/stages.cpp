#include "roadcast/stages.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <nlohmann/json.hpp>

#include "roadcast/csv.hpp"
#include "roadcast/threadpool.hpp"
#include "roadcast/timeutil.hpp"

namespace roadcast::stages {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using config::ValidationError;

namespace {

void require_file(const std::string& path, const char* produced_by) {
    if (!fs::exists(path))
        throw ValidationError("missing input file: " + path + " (produce it with the '" +
                              produced_by + "' stage or point the config at an existing file)");
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

}  // namespace

synth::SynthSummary run_synth(const config::RunConfig& cfg) {
    synth::SynthPaths paths;
    paths.events_csv = cfg.paths.events;
    paths.weather_csv = cfg.paths.weather;
    paths.poi_csv = cfg.paths.poi;
    paths.nodes_csv = cfg.paths.nodes;
    paths.ways_csv = cfg.paths.ways;
    paths.manifest_json = cfg.synth_manifest();
    fs::create_directories(cfg.paths.output_dir);
    return synth::generate(cfg.synth, cfg.grid, paths);
}

IngestSummary run_ingest(const config::RunConfig& cfg) {
    require_file(cfg.paths.events, "synth");
    auto in = open_in(cfg.paths.events);
    auto parsed = ingest::parse_events(in);
    auto deduped = ingest::dedup(parsed.events, cfg.dedup);

    // survivors re-serialized in the input schema for the augment stage
    auto out = open_out(cfg.ingested_csv());
    csv::write_row(out, {"id", "source", "severity", "start_time", "end_time", "start_lat",
                         "start_lng", "end_lat", "end_lng", "distance", "description", "city",
                         "state"});
    for (const auto& e : deduped) {
        csv::write_row(out,
                       {e.id, ingest::to_string(e.source), std::to_string(e.severity),
                        timeutil::format_iso8601(e.start_time),
                        e.end_time ? timeutil::format_iso8601(*e.end_time) : "",
                        csv::format_double(e.start_lat), csv::format_double(e.start_lng),
                        e.end_lat ? csv::format_double(*e.end_lat) : "",
                        e.end_lng ? csv::format_double(*e.end_lng) : "",
                        e.distance_mi ? csv::format_double(*e.distance_mi) : "", e.description,
                        e.city, e.state});
    }

    json report;
    report["rows_ok"] = parsed.events.size();
    report["rows_bad"] = parsed.errors.size();
    report["after_dedup"] = deduped.size();
    json errors = json::array();
    for (const auto& err : parsed.errors)
        errors.push_back({{"line", err.line}, {"reason", err.reason}});
    report["errors"] = errors;
    auto rep = open_out(cfg.ingest_report());
    rep << report.dump(2) << "\n";

    return {parsed.events.size(), parsed.errors.size(), deduped.size()};
}

std::size_t run_augment(const config::RunConfig& cfg) {
    require_file(cfg.ingested_csv(), "ingest");
    require_file(cfg.paths.weather, "synth");
    require_file(cfg.paths.poi, "synth");
    require_file(cfg.paths.nodes, "synth");
    require_file(cfg.paths.ways, "synth");

    auto in = open_in(cfg.ingested_csv());
    auto parsed = ingest::parse_events(in);
    if (!parsed.errors.empty())
        throw std::runtime_error("ingested.csv is corrupt: " + parsed.errors.front().reason);

    auto win = open_in(cfg.paths.weather);
    augment::WeatherTable weather(augment::load_weather_csv(win));
    auto pin = open_in(cfg.paths.poi);
    augment::PoiSet pois(augment::load_poi_csv(pin));
    auto nin = open_in(cfg.paths.nodes);
    auto wyin = open_in(cfg.paths.ways);
    augment::RoadNetwork network(augment::load_nodes_csv(nin), augment::load_ways_csv(wyin));

    std::vector<augment::AugmentedEvent> augmented(parsed.events.size());
    threads::parallel_for(parsed.events.size(), [&](std::size_t i) {
        augmented[i] = augment::augment_event(parsed.events[i], weather, pois, network,
                                              cfg.augment);
    });

    auto out = open_out(cfg.augmented_csv());
    augment::write_augmented_csv(out, augmented);
    return augmented.size();
}

FeaturesSummary run_features(const config::RunConfig& cfg) {
    require_file(cfg.augmented_csv(), "augment");
    require_file(cfg.paths.poi, "synth");
    auto in = open_in(cfg.augmented_csv());
    const auto events = augment::read_augmented_csv(in);
    auto pin = open_in(cfg.paths.poi);
    const auto pois = augment::load_poi_csv(pin);

    const auto store = features::build_store(events, pois, cfg.grid);
    fs::create_directories(cfg.paths.output_dir);
    features::save_store(store, cfg.features_bin(), cfg.features_json());

    FeaturesSummary s;
    s.cells = store.series.size();
    s.intervals = store.interval_count;
    for (const auto& series : store.series) s.records += series.vectors.size();
    return s;
}

TilesSummary run_tiles(const config::RunConfig& cfg) {
    require_file(cfg.features_json(), "features");
    require_file(cfg.paths.nodes, "synth");
    require_file(cfg.paths.ways, "synth");
    const auto store = features::load_store(cfg.features_bin(), cfg.features_json());
    auto nin = open_in(cfg.paths.nodes);
    auto wyin = open_in(cfg.paths.ways);
    augment::RoadNetwork network(augment::load_nodes_csv(nin), augment::load_ways_csv(wyin));
    const auto palette = tiles::Palette::standard();

    TilesSummary s;
    s.covers_cell = tiles::tile_covers_cell(cfg.grid);
    if (!s.covers_cell)
        std::cerr << "warning: tile side " << tiles::kTileSideM
                  << " m is smaller than the cell circumdiameter " << 2.0 * cfg.grid.edge_m()
                  << " m; tiles crop the cell corners\n";

    fs::create_directories(cfg.tiles_dir());
    std::vector<tiles::Tile> rendered(store.series.size(), tiles::Tile(1));
    threads::parallel_for(store.series.size(), [&](std::size_t i) {
        rendered[i] =
            tiles::render_tile(cfg.grid, store.series[i].cell, network, palette, cfg.tile_size);
    });
    for (std::size_t i = 0; i < store.series.size(); ++i) {
        tiles::save_tile(rendered[i],
                         cfg.tiles_dir() + "/" + tiles::tile_filename(store.series[i].cell));
        ++s.tiles;
    }
    return s;
}

LoadedData load_data(const config::RunConfig& cfg) {
    require_file(cfg.features_bin(), "features");
    require_file(cfg.features_json(), "features");
    LoadedData d;
    d.store = features::load_store(cfg.features_bin(), cfg.features_json());
    d.windows = features::build_windows(d.store);
    for (const auto& s : d.store.series) {
        d.cells.push_back(s.cell);
        const auto tile_path = cfg.tiles_dir() + "/" + tiles::tile_filename(s.cell);
        require_file(tile_path, "tiles");
        d.tiles.emplace(s.cell, tiles::load_tile(tile_path));
    }
    if (cfg.scenario == 1) {
        d.splits = features::temporal_split(d.store.grid, d.windows);
    } else {
        const auto cell_split = features::spatial_split(d.cells, cfg.seed);
        d.splits = features::split_by_cells(cell_split, d.windows);
    }
    d.dataset.splits = &d.splits;
    d.dataset.tiles = &d.tiles;
    d.dataset.norm = d.store.norm;
    return d;
}

TrainSummary run_train(const config::RunConfig& cfg) {
    auto data = load_data(cfg);
    TrainSummary summary;
    fs::create_directories(cfg.run_dir());
    const auto kinds = cfg.scenario == 2
                           ? std::vector<models::ModelKind>{models::ModelKind::Drcp}
                           : cfg.model_kinds;
    for (auto kind : kinds) {
        auto model = kind == models::ModelKind::Drcp
                         ? models::build_drcp(cfg.drcp, cfg.train, cfg.seed)
                         : models::build_baseline(kind, cfg.train, cfg.seed);
        auto result = models::train(*model, data.dataset, cfg.train);
        const std::string path = cfg.checkpoint(models::to_string(kind));
        models::save_checkpoint(*model, path);

        auto hist = open_out(cfg.run_dir() + "/history_" + models::to_string(kind) + ".csv");
        hist << "epoch,train_loss,val_loss,lr\n";
        for (std::size_t e = 0; e < result.history.size(); ++e) {
            const auto& h = result.history[e];
            hist << (e + 1) << "," << csv::format_double(h.train_loss) << ","
                 << csv::format_double(h.val_loss) << "," << csv::format_double(h.lr) << "\n";
        }
        summary.checkpoints.push_back(path);
        summary.results.push_back(std::move(result));
    }
    return summary;
}

std::vector<std::pair<std::string, eval::Metrics>> run_evaluate(const config::RunConfig& cfg) {
    auto data = load_data(cfg);
    std::vector<int> labels;
    for (const auto& w : data.splits.test) labels.push_back(w.label);
    if (labels.empty()) throw ValidationError("evaluate: the test split has no windows");

    std::vector<std::pair<std::string, eval::Metrics>> rows;
    const auto kinds = cfg.scenario == 2
                           ? std::vector<models::ModelKind>{models::ModelKind::Drcp}
                           : cfg.model_kinds;
    for (auto kind : kinds) {
        const std::string path = cfg.checkpoint(models::to_string(kind));
        require_file(path, "train");
        auto model = models::load_checkpoint(path, cfg.train, kind);
        const auto probs = models::predict(*model, data.dataset, data.splits.test);
        rows.push_back({models::to_string(kind),
                        eval::compute_metrics(probs, labels, cfg.threshold)});
        if (cfg.report_macro_f1)
            std::cout << models::to_string(kind)
                      << " macro-f1: " << eval::macro_f1(probs, labels, cfg.threshold) << "\n";
    }

    auto txt = open_out(cfg.metrics_txt());
    txt << eval::metrics_table(rows);
    auto csvf = open_out(cfg.metrics_csv_path());
    csvf << eval::metrics_csv(rows);
    return rows;
}

std::size_t run_predict(const config::RunConfig& cfg) {
    auto data = load_data(cfg);
    auto kind = models::model_kind_from_string(cfg.predict_model);
    if (!kind) throw ValidationError("predict: unknown model '" + cfg.predict_model + "'");
    const std::string path = cfg.checkpoint(cfg.predict_model);
    require_file(path, "train");
    auto model = models::load_checkpoint(path, cfg.train, *kind);

    const auto& windows = data.splits.test;
    if (windows.empty()) throw ValidationError("predict: the test split has no windows");
    const auto probs = models::predict(*model, data.dataset, windows);

    auto out = open_out(cfg.predictions_csv());
    out << "cell_id,interval_index,probability,predicted,actual\n";
    for (std::size_t i = 0; i < windows.size(); ++i) {
        out << grid::cell_id(windows[i].cell) << "," << windows[i].target_interval << ","
            << csv::format_double(probs[i]) << ","
            << models::predict_label(probs[i], static_cast<float>(cfg.threshold)) << ","
            << static_cast<int>(windows[i].label) << "\n";
    }
    return windows.size();
}

eval::DatasetStats run_stats(const config::RunConfig& cfg) {
    require_file(cfg.augmented_csv(), "augment");
    auto in = open_in(cfg.augmented_csv());
    const auto events = augment::read_augmented_csv(in);
    const auto stats = eval::compute_dataset_stats(events);
    auto js = open_out(cfg.stats_json_path());
    js << eval::stats_json(stats) << "\n";
    auto txt = open_out(cfg.stats_txt_path());
    txt << eval::stats_text(stats);
    return stats;
}

std::size_t run_export_map(const config::RunConfig& cfg) {
    require_file(cfg.predictions_csv(), "predict");
    auto in = open_in(cfg.predictions_csv());
    csv::Reader reader(in);
    const int c_cell = reader.column("cell_id");
    const int c_iv = reader.column("interval_index");
    const int c_pred = reader.column("predicted");
    const int c_act = reader.column("actual");
    if (c_cell < 0 || c_iv < 0 || c_pred < 0)
        throw ValidationError("predictions.csv: missing required columns");

    std::map<int, std::vector<eval::CellPrediction>> by_interval;
    std::vector<std::string> f;
    while (reader.next(f)) {
        auto cell = grid::cell_from_id(f[c_cell]);
        if (!cell) throw std::runtime_error("predictions.csv: bad cell id " + f[c_cell]);
        eval::CellPrediction p;
        p.cell = *cell;
        p.predicted = std::stoi(f[c_pred]);
        if (c_act >= 0 && !f[c_act].empty()) p.actual = std::stoi(f[c_act]);
        by_interval[std::stoi(f[c_iv])].push_back(p);
    }

    fs::create_directories(cfg.maps_dir());
    std::size_t written = 0;
    for (const auto& [iv, preds] : by_interval) {
        auto out = open_out(cfg.maps_dir() + "/map_" + std::to_string(iv) + ".geojson");
        out << eval::export_geojson(cfg.grid, iv, preds) << "\n";
        ++written;
    }
    return written;
}

}  // namespace roadcast::stages
