#include "roadcast/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "roadcast/timeutil.hpp"

namespace roadcast::config {

using json = nlohmann::ordered_json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key))
            throw ValidationError("config: unknown key '" + key + "' in " + where);
    }
}

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError("config: not valid JSON");
    RunConfig cfg;

    reject_unknown(j, {"seed", "paths", "grid", "dedup", "augment", "tile", "train", "drcp",
                       "models", "scenario", "macro_f1", "threshold", "predict_model", "synth"},
                   "top level");

    cfg.seed = j.value("seed", cfg.seed);
    cfg.scenario = j.value("scenario", cfg.scenario);
    if (cfg.scenario != 1 && cfg.scenario != 2)
        throw ValidationError("config: scenario must be 1 or 2");
    cfg.report_macro_f1 = j.value("macro_f1", cfg.report_macro_f1);
    cfg.threshold = j.value("threshold", cfg.threshold);
    cfg.predict_model = j.value("predict_model", cfg.predict_model);

    if (j.contains("paths")) {
        const auto& p = j["paths"];
        reject_unknown(p, {"events", "weather", "poi", "nodes", "ways", "output_dir"}, "paths");
        cfg.paths.output_dir = p.value("output_dir", cfg.paths.output_dir);
        cfg.paths.events = p.value("events", "");
        cfg.paths.weather = p.value("weather", "");
        cfg.paths.poi = p.value("poi", "");
        cfg.paths.nodes = p.value("nodes", "");
        cfg.paths.ways = p.value("ways", "");
    }
    const std::string synth_dir = cfg.paths.output_dir + "/synth";
    if (cfg.paths.events.empty()) cfg.paths.events = synth_dir + "/events.csv";
    if (cfg.paths.weather.empty()) cfg.paths.weather = synth_dir + "/weather.csv";
    if (cfg.paths.poi.empty()) cfg.paths.poi = synth_dir + "/poi.csv";
    if (cfg.paths.nodes.empty()) cfg.paths.nodes = synth_dir + "/nodes.csv";
    if (cfg.paths.ways.empty()) cfg.paths.ways = synth_dir + "/ways.csv";

    if (j.contains("grid")) {
        const auto& g = j["grid"];
        reject_unknown(g, {"origin_lat", "origin_lng", "hex_area_km2", "epoch_start",
                           "interval_days"},
                       "grid");
        cfg.grid.origin_lat = g.value("origin_lat", cfg.grid.origin_lat);
        cfg.grid.origin_lng = g.value("origin_lng", cfg.grid.origin_lng);
        cfg.grid.hex_area_km2 = g.value("hex_area_km2", cfg.grid.hex_area_km2);
        if (cfg.grid.hex_area_km2 <= 0) throw ValidationError("config: hex_area_km2 must be > 0");
        if (g.contains("epoch_start")) {
            auto t = timeutil::parse_iso8601(g["epoch_start"].get<std::string>());
            if (!t) throw ValidationError("config: bad grid.epoch_start");
            cfg.grid.epoch_start = *t;
        }
        cfg.grid.interval_days = g.value("interval_days", cfg.grid.interval_days);
        if (cfg.grid.interval_days < 1)
            throw ValidationError("config: interval_days must be >= 1");
    }

    if (j.contains("dedup")) {
        const auto& d = j["dedup"];
        reject_unknown(d, {"radius_m", "window_minutes"}, "dedup");
        cfg.dedup.radius_m = d.value("radius_m", cfg.dedup.radius_m);
        cfg.dedup.window_minutes = d.value("window_minutes", cfg.dedup.window_minutes);
    }

    if (j.contains("augment")) {
        const auto& a = j["augment"];
        reject_unknown(a, {"tau_m", "s_nearest", "distance_m"}, "augment");
        cfg.augment.poi_tau_m = a.value("tau_m", cfg.augment.poi_tau_m);
        if (cfg.augment.poi_tau_m <= 0) throw ValidationError("config: tau_m must be > 0");
        cfg.augment.road_match.s_nearest = a.value("s_nearest", cfg.augment.road_match.s_nearest);
        if (cfg.augment.road_match.s_nearest < 1)
            throw ValidationError("config: s_nearest must be >= 1");
        cfg.augment.road_match.distance_m =
            a.value("distance_m", cfg.augment.road_match.distance_m);
        if (cfg.augment.road_match.distance_m <= 0)
            throw ValidationError("config: distance_m must be > 0");
    }

    if (j.contains("tile")) {
        const auto& t = j["tile"];
        reject_unknown(t, {"size"}, "tile");
        cfg.tile_size = t.value("size", cfg.tile_size);
        if (cfg.tile_size < 16 || cfg.tile_size % 16)
            throw ValidationError("config: tile.size must be a positive multiple of 16");
    }
    cfg.drcp.tile_size = cfg.tile_size;

    if (j.contains("train")) {
        const auto& t = j["train"];
        reject_unknown(t, {"max_epochs", "early_stop_patience", "batch_size",
                           "class_weight_negative", "class_weight_positive", "lr_initial",
                           "lr_factor", "lr_patience", "lr_floor", "l2_lambda"},
                       "train");
        cfg.train.max_epochs = t.value("max_epochs", cfg.train.max_epochs);
        cfg.train.early_stop_patience =
            t.value("early_stop_patience", cfg.train.early_stop_patience);
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.class_weight_negative =
            t.value("class_weight_negative", cfg.train.class_weight_negative);
        cfg.train.class_weight_positive =
            t.value("class_weight_positive", cfg.train.class_weight_positive);
        cfg.train.lr_initial = t.value("lr_initial", cfg.train.lr_initial);
        cfg.train.lr_factor = t.value("lr_factor", cfg.train.lr_factor);
        cfg.train.lr_patience = t.value("lr_patience", cfg.train.lr_patience);
        cfg.train.lr_floor = t.value("lr_floor", cfg.train.lr_floor);
        cfg.train.l2_lambda = t.value("l2_lambda", cfg.train.l2_lambda);
        if (cfg.train.max_epochs < 1 || cfg.train.early_stop_patience < 1 ||
            cfg.train.batch_size < 1 || cfg.train.lr_patience < 1)
            throw ValidationError("config: train counts must be positive");
    }
    cfg.train.seed = cfg.seed;

    if (j.contains("drcp")) {
        const auto& d = j["drcp"];
        reject_unknown(d, {"conv_block_channels", "batchnorm_in_conv_blocks", "decoder_channels",
                           "post_flatten_dense", "lstm_units", "rnn_dense", "fc_sizes",
                           "lstm_tanh"},
                       "drcp");
        if (d.contains("conv_block_channels"))
            cfg.drcp.conv_block_channels = d["conv_block_channels"].get<std::vector<int>>();
        if (d.contains("batchnorm_in_conv_blocks"))
            cfg.drcp.batchnorm_in_conv_blocks =
                d["batchnorm_in_conv_blocks"].get<std::vector<bool>>();
        if (d.contains("decoder_channels"))
            cfg.drcp.decoder_channels = d["decoder_channels"].get<std::vector<int>>();
        cfg.drcp.post_flatten_dense = d.value("post_flatten_dense", cfg.drcp.post_flatten_dense);
        if (d.contains("lstm_units")) cfg.drcp.lstm_units = d["lstm_units"].get<std::vector<int>>();
        cfg.drcp.rnn_dense = d.value("rnn_dense", cfg.drcp.rnn_dense);
        if (d.contains("fc_sizes")) cfg.drcp.fc_sizes = d["fc_sizes"].get<std::vector<int>>();
        cfg.drcp.lstm_tanh = d.value("lstm_tanh", cfg.drcp.lstm_tanh);
    }

    if (j.contains("models")) {
        cfg.model_kinds.clear();
        for (const auto& m : j["models"]) {
            auto kind = models::model_kind_from_string(m.get<std::string>());
            if (!kind)
                throw ValidationError("config: unknown model '" + m.get<std::string>() + "'");
            cfg.model_kinds.push_back(*kind);
        }
        if (cfg.model_kinds.empty()) throw ValidationError("config: models list is empty");
    }

    if (j.contains("synth")) {
        const auto& s = j["synth"];
        reject_unknown(s, {"grid_cols", "grid_rows", "intervals", "prone_fraction", "p_active",
                           "p_inactive", "p_quiet", "duplicate_rate", "max_events_per_hit"},
                       "synth");
        cfg.synth.grid_cols = s.value("grid_cols", cfg.synth.grid_cols);
        cfg.synth.grid_rows = s.value("grid_rows", cfg.synth.grid_rows);
        cfg.synth.intervals = s.value("intervals", cfg.synth.intervals);
        cfg.synth.prone_fraction = s.value("prone_fraction", cfg.synth.prone_fraction);
        cfg.synth.p_active = s.value("p_active", cfg.synth.p_active);
        cfg.synth.p_inactive = s.value("p_inactive", cfg.synth.p_inactive);
        cfg.synth.p_quiet = s.value("p_quiet", cfg.synth.p_quiet);
        cfg.synth.duplicate_rate = s.value("duplicate_rate", cfg.synth.duplicate_rate);
        cfg.synth.max_events_per_hit = s.value("max_events_per_hit", cfg.synth.max_events_per_hit);
        if (cfg.synth.grid_cols < 1 || cfg.synth.grid_rows < 1 || cfg.synth.intervals < 1 ||
            cfg.synth.max_events_per_hit < 1)
            throw ValidationError("config: synth counts must be positive");
    }
    cfg.synth.seed = cfg.seed;
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return config_from_json_text(text);
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["paths"] = {{"events", cfg.paths.events},     {"weather", cfg.paths.weather},
                  {"poi", cfg.paths.poi},           {"nodes", cfg.paths.nodes},
                  {"ways", cfg.paths.ways},         {"output_dir", cfg.paths.output_dir}};
    j["grid"] = {{"origin_lat", cfg.grid.origin_lat},
                 {"origin_lng", cfg.grid.origin_lng},
                 {"hex_area_km2", cfg.grid.hex_area_km2},
                 {"epoch_start", timeutil::format_iso8601(cfg.grid.epoch_start)},
                 {"interval_days", cfg.grid.interval_days}};
    j["dedup"] = {{"radius_m", cfg.dedup.radius_m}, {"window_minutes", cfg.dedup.window_minutes}};
    j["augment"] = {{"tau_m", cfg.augment.poi_tau_m},
                    {"s_nearest", cfg.augment.road_match.s_nearest},
                    {"distance_m", cfg.augment.road_match.distance_m}};
    j["tile"] = {{"size", cfg.tile_size}};
    j["train"] = {{"max_epochs", cfg.train.max_epochs},
                  {"early_stop_patience", cfg.train.early_stop_patience},
                  {"batch_size", cfg.train.batch_size},
                  {"class_weight_negative", cfg.train.class_weight_negative},
                  {"class_weight_positive", cfg.train.class_weight_positive},
                  {"lr_initial", cfg.train.lr_initial},
                  {"lr_factor", cfg.train.lr_factor},
                  {"lr_patience", cfg.train.lr_patience},
                  {"lr_floor", cfg.train.lr_floor},
                  {"l2_lambda", cfg.train.l2_lambda}};
    json kinds = json::array();
    for (auto k : cfg.model_kinds) kinds.push_back(models::to_string(k));
    j["models"] = kinds;
    j["scenario"] = cfg.scenario;
    j["threshold"] = cfg.threshold;
    j["synth"] = {{"grid_cols", cfg.synth.grid_cols},
                  {"grid_rows", cfg.synth.grid_rows},
                  {"intervals", cfg.synth.intervals},
                  {"prone_fraction", cfg.synth.prone_fraction},
                  {"p_active", cfg.synth.p_active},
                  {"p_inactive", cfg.synth.p_inactive},
                  {"p_quiet", cfg.synth.p_quiet},
                  {"duplicate_rate", cfg.synth.duplicate_rate},
                  {"max_events_per_hit", cfg.synth.max_events_per_hit}};
    return j.dump(2);
}

}  // namespace roadcast::config
