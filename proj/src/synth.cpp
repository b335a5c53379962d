#include "roadcast/synth.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "roadcast/csv.hpp"
#include "roadcast/rng.hpp"
#include "roadcast/tiles.hpp"
#include "roadcast/timeutil.hpp"

namespace roadcast::synth {

namespace {

enum Population { GroupA = 0, GroupB = 1, Quiet = 2 };

struct CellPlan {
    grid::HexCell hex;
    double cx = 0.0, cy = 0.0;  // planar meters
    Population population = Quiet;
    int poi_level = 0;
    double p_factor = 1.0;
    std::vector<std::pair<double, double>> anchors;  // event sites, planar
};

bool month_active(Population p, int month) {
    if (p == Quiet) return false;
    const bool summer_half = month >= 4 && month <= 9;
    return p == GroupA ? summer_half : !summer_half;
}

const std::vector<std::string>& road_phrases() {
    static const std::vector<std::string> v = {
        "Closed due to roadwork near the interchange",
        "Road closed between mile markers 12 and 14",
        "Closed for bridge deck maintenance",
    };
    return v;
}

const std::vector<std::string>& lane_phrases() {
    static const std::vector<std::string> v = {
        "Right lane blocked by paving crew",
        "Left lane closed for resurfacing",
        "Roadway reduced to one lane",
        "Shoulder closed near the exit ramp",
        "Two lanes closed overnight for milling",
        "Intermittent lane closures for utility work",
    };
    return v;
}

const std::vector<std::string>& neutral_phrases() {
    static const std::vector<std::string> v = {
        "Paving equipment staged nearby",
        "Crews performing survey work",
        "Resurfacing project announced for this segment",
        "Bridge inspection underway",
        "Pothole patching in progress",
        "New signal installation planned",
        "Milling operation scheduled this week",
    };
    return v;
}

std::ofstream open_out(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

}  // namespace

SynthSummary generate(const SynthConfig& cfg, const grid::GridConfig& grid_cfg,
                      const SynthPaths& paths) {
    rng::Rng rng(rng::derive_seed(cfg.seed, "synth"));
    const double a = grid_cfg.edge_m();
    const double sqrt3 = std::sqrt(3.0);

    // -------- plan the cells
    std::vector<CellPlan> cells;
    for (int q = 0; q < cfg.grid_cols; ++q) {
        for (int r = 0; r < cfg.grid_rows; ++r) {
            CellPlan c;
            c.hex = {q, r};
            c.cx = 1.5 * a * q;
            c.cy = sqrt3 * a * (r + q / 2.0);
            cells.push_back(c);
        }
    }
    rng.shuffle(cells);
    const int prone_count = static_cast<int>(std::lround(cfg.prone_fraction *
                                                         static_cast<double>(cells.size())));
    for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
        auto& c = cells[i];
        if (i < prone_count) {
            c.population = (i % 2 == 0) ? GroupA : GroupB;
            c.poi_level = (i / 2) % 4;  // balanced across the two groups
            c.p_factor = 0.90 + 0.03 * c.poi_level;
        } else {
            c.population = Quiet;
            c.poi_level = static_cast<int>(rng.below(2));
        }
    }

    // -------- POI file (densities drive the planted probability)
    {
        auto out = open_out(paths.poi_csv);
        csv::write_row(out, {"lat", "lng", "tag"});
        for (const auto& c : cells) {
            std::vector<std::string> tags;
            if (c.population != Quiet) {
                const int signals = 6 + 2 * c.poi_level;
                const int junctions = 2 + (c.poi_level >= 2 ? 1 : 0);
                for (int i = 0; i < signals; ++i) tags.push_back("traffic_signal");
                for (int i = 0; i < junctions; ++i) tags.push_back("junction");
            } else {
                tags.push_back("amenity");
                for (int i = 0; i < c.poi_level; ++i) tags.push_back("traffic_signal");
            }
            for (const auto& tag : tags) {
                const double ang = rng.uniform(0.0, 2.0 * geo::kPi);
                const double rad = rng.uniform(30.0, 400.0);
                const auto p = grid::unproject(grid_cfg, c.cx + rad * std::cos(ang),
                                               c.cy + rad * std::sin(ang));
                csv::write_row(out, {csv::format_double(p.lat), csv::format_double(p.lng), tag});
            }
        }
    }

    // -------- road network: stripes for prone cells, sparse X for quiet ones
    std::int64_t next_node = 1, next_way = 1;
    auto nodes_out = open_out(paths.nodes_csv);
    auto ways_out = open_out(paths.ways_csv);
    csv::write_row(nodes_out, {"node_id", "lat", "lng"});
    csv::write_row(ways_out, {"way_id", "road_class", "maxspeed", "node_ids"});

    const double half = tiles::kTileSideM / 2.0;
    const double px64 = tiles::kTileSideM / 64.0;
    const double anchor_radius = 1000.0;  // keeps events (plus jitter) inside the cell

    auto emit_way = [&](CellPlan& cell, const std::vector<std::pair<double, double>>& pts,
                        const char* road_class, const char* maxspeed) {
        std::string id_list;
        for (const auto& [x, y] : pts) {
            const auto ll = grid::unproject(grid_cfg, x, y);
            csv::write_row(nodes_out, {std::to_string(next_node), csv::format_double(ll.lat),
                                       csv::format_double(ll.lng)});
            if (!id_list.empty()) id_list += "|";
            id_list += std::to_string(next_node);
            ++next_node;
            const double d = std::hypot(x - cell.cx, y - cell.cy);
            if (d <= anchor_radius) cell.anchors.push_back({x, y});
        }
        csv::write_row(ways_out,
                       {std::to_string(next_way), road_class, maxspeed, id_list});
        ++next_way;
    };

    for (auto& c : cells) {
        if (c.population != Quiet) {
            const bool horizontal = c.population == GroupA;
            const int phase = static_cast<int>(rng.below(2));
            for (int k = 0; k < 16; ++k) {
                // one stripe per 4-pixel band at the reduced tile resolution
                const double offset = (2 + phase + 4 * k + 0.5) * px64;
                std::vector<std::pair<double, double>> pts;
                for (int s = 0; s <= 12; ++s) {
                    const double along = -half + tiles::kTileSideM * s / 12.0;
                    if (horizontal) pts.push_back({c.cx + along, c.cy + half - offset});
                    else pts.push_back({c.cx - half + offset, c.cy + along});
                }
                const bool declares = rng.chance(0.5);
                emit_way(c, pts, "residential", declares ? "25" : "");
            }
        } else {
            for (int diag = 0; diag < 2; ++diag) {
                std::vector<std::pair<double, double>> pts;
                for (int s = 0; s <= 8; ++s) {
                    const double t = -800.0 + 1600.0 * s / 8.0;
                    pts.push_back({c.cx + t, c.cy + (diag ? t : -t)});
                }
                emit_way(c, pts, "path", "");
            }
        }
    }
    nodes_out.close();
    ways_out.close();

    // -------- weather: three shared stations, six-hourly observations
    {
        auto out = open_out(paths.weather_csv);
        csv::write_row(out, {"station_id", "station_lat", "station_lng", "time", "temperature",
                             "wind_chill", "humidity", "pressure", "visibility", "wind_direction",
                             "wind_speed", "precipitation", "condition"});
        struct Station {
            const char* id;
            double dlat, dlng;
        };
        const Station stations[3] = {{"ST01", 0.15, 0.10}, {"ST02", -0.20, 0.15},
                                     {"ST03", 0.05, -0.25}};
        static const char* kDirs[8] = {"N", "NE", "E", "SE", "S", "SW", "W", "NW"};
        const std::int64_t t0 = grid_cfg.epoch_start - 2 * 86400;
        const std::int64_t t1 = grid_cfg.epoch_start +
                                static_cast<std::int64_t>(cfg.intervals) *
                                    grid_cfg.interval_days * 86400 +
                                2 * 86400;
        for (const auto& st : stations) {
            const double lat = grid_cfg.origin_lat + st.dlat;
            const double lng = grid_cfg.origin_lng + st.dlng;
            for (std::int64_t t = t0; t < t1; t += 6 * 3600) {
                const int month = timeutil::utc_month(t);
                const double doy_angle =
                    2.0 * geo::kPi * static_cast<double>((t / 86400) % 365) / 365.0;
                const double hour = static_cast<double>(t % 86400) / 3600.0;
                const double temp = 55.0 - 28.0 * std::cos(doy_angle) +
                                    6.0 * std::sin(2.0 * geo::kPi * hour / 24.0) +
                                    rng.normal(0.0, 2.5);
                std::string cond = "clear";
                double precip = 0.0, visibility = rng.uniform(5.0, 10.0);
                const double u = rng.uniform();
                const bool winter = month == 12 || month <= 2;
                const bool summer = month >= 6 && month <= 8;
                if (winter && u < 0.25) {
                    cond = "snow";
                    precip = 0.3 + std::abs(rng.normal(0.0, 2.5));
                } else if (u < (winter ? 0.33 : summer ? 0.12 : 0.18)) {
                    cond = "rain";
                    precip = 0.3 + std::abs(rng.normal(0.0, 3.0));
                } else if (summer && u < 0.20) {
                    cond = "thunderstorm";
                    precip = 2.0 + std::abs(rng.normal(0.0, 5.0));
                } else if (u < (summer ? 0.22 : 0.24)) {
                    cond = "fog";
                    visibility = rng.uniform(0.2, 1.8);
                } else if (u > 0.98) {
                    precip = rng.uniform(0.05, 0.5);  // drizzle under a clear sky
                }
                std::string chill;
                if (temp < 40.0) chill = csv::format_double(temp - rng.uniform(0.0, 8.0));
                csv::write_row(
                    out, {st.id, csv::format_double(lat), csv::format_double(lng),
                          timeutil::format_iso8601(t), csv::format_double(temp), chill,
                          csv::format_double(rng.uniform(30.0, 95.0)),
                          csv::format_double(rng.uniform(29.3, 30.4)),
                          csv::format_double(visibility), kDirs[rng.below(8)],
                          csv::format_double(rng.uniform(0.0, 25.0)), csv::format_double(precip),
                          cond});
            }
        }
    }

    // -------- events
    SynthSummary summary;
    summary.cells = static_cast<int>(cells.size());
    summary.prone_cells = prone_count;
    summary.intervals = cfg.intervals;

    auto events_out = open_out(paths.events_csv);
    csv::write_row(events_out,
                   {"id", "source", "severity", "start_time", "end_time", "start_lat", "start_lng",
                    "end_lat", "end_lng", "distance", "description", "city", "state"});

    const std::int64_t interval_len = static_cast<std::int64_t>(grid_cfg.interval_days) * 86400;
    std::int64_t next_event = 1;
    double expected_sum = 0.0;
    std::int64_t positives = 0, prone_positives = 0, quiet_positives = 0;

    auto write_event = [&](const std::string& id, const char* source, int severity,
                           std::int64_t start, std::optional<std::int64_t> end, double x, double y,
                           std::optional<std::pair<double, double>> endpoint,
                           std::optional<double> distance, const std::string& desc,
                           const CellPlan& cell) {
        const auto ll = grid::unproject(grid_cfg, x, y);
        std::string elat, elng;
        if (endpoint) {
            const auto e = grid::unproject(grid_cfg, endpoint->first, endpoint->second);
            elat = csv::format_double(e.lat);
            elng = csv::format_double(e.lng);
        }
        const char* state = cell.hex.q < cfg.grid_cols / 2 ? "Westland" : "Eastland";
        const char* city = cell.hex.r < cfg.grid_rows / 2
                               ? (cell.hex.q < cfg.grid_cols / 2 ? "North Ridge" : "Elm Park")
                               : (cell.hex.q < cfg.grid_cols / 2 ? "South Bay" : "Cedar Falls");
        csv::write_row(events_out,
                       {id, source, std::to_string(severity), timeutil::format_iso8601(start),
                        end ? timeutil::format_iso8601(*end) : "", csv::format_double(ll.lat),
                        csv::format_double(ll.lng), elat, elng,
                        distance ? csv::format_double(*distance) : "", desc, city, state});
        ++summary.events_written;
    };

    for (const auto& c : cells) {
        for (int iv = 0; iv < cfg.intervals; ++iv) {
            const std::int64_t start0 = grid_cfg.epoch_start + iv * interval_len;
            const int month = timeutil::utc_month(start0);
            double p = cfg.p_quiet;
            if (c.population != Quiet)
                p = month_active(c.population, month) ? cfg.p_active * c.p_factor
                                                      : cfg.p_inactive;
            expected_sum += p;
            if (!rng.chance(p)) continue;
            ++positives;
            if (c.population != Quiet) ++prone_positives;
            else ++quiet_positives;

            const int n_events = 1 + static_cast<int>(rng.below(cfg.max_events_per_hit));
            for (int e = 0; e < n_events; ++e) {
                const auto& anchor = c.anchors[rng.below(c.anchors.size())];
                const double x = anchor.first + rng.uniform(-20.0, 20.0);
                const double y = anchor.second + rng.uniform(-20.0, 20.0);
                const std::int64_t start = start0 + static_cast<std::int64_t>(rng.below(
                                                        static_cast<std::uint64_t>(interval_len)));
                std::optional<std::int64_t> end;
                if (rng.chance(0.75)) {
                    const double u = rng.uniform();
                    double hours;
                    if (u < 0.6) hours = rng.uniform(1.0, 12.0);
                    else if (u < 0.9) hours = rng.uniform(24.0, 240.0);
                    else hours = rng.uniform(15.0 * 24.0, 60.0 * 24.0);
                    end = start + static_cast<std::int64_t>(hours * 3600.0);
                }
                std::optional<double> distance;
                std::optional<std::pair<double, double>> endpoint;
                if (rng.chance(0.8)) {
                    distance = rng.uniform(0.1, 5.0);
                    endpoint = {{x + rng.uniform(-80.0, 80.0), y + rng.uniform(-80.0, 80.0)}};
                }
                const double dpick = rng.uniform();
                const std::string& desc =
                    dpick < 0.05
                        ? road_phrases()[rng.below(road_phrases().size())]
                        : dpick < 0.20 ? lane_phrases()[rng.below(lane_phrases().size())]
                                       : neutral_phrases()[rng.below(neutral_phrases().size())];
                const bool bing = rng.chance(0.9);
                const int severity = 1 + static_cast<int>(rng.below(4));
                char idbuf[16];
                std::snprintf(idbuf, sizeof idbuf, "E%07lld",
                              static_cast<long long>(next_event++));
                write_event(idbuf, bing ? "Bing" : "MapQuest", severity, start, end, x, y,
                            endpoint, distance, desc, c);

                if (rng.chance(cfg.duplicate_rate)) {
                    // cross-source near-duplicate; dedup keeps the original
                    // (identical description, smaller id)
                    char dupbuf[16];
                    std::snprintf(dupbuf, sizeof dupbuf, "E%07lld",
                                  static_cast<long long>(next_event++));
                    write_event(dupbuf, bing ? "MapQuest" : "Bing", severity, start + 300, end,
                                x + rng.uniform(-40.0, 40.0), y + rng.uniform(-40.0, 40.0),
                                endpoint, distance, desc, c);
                }
            }
        }
    }
    events_out.close();

    const double n_pairs = static_cast<double>(cells.size()) * cfg.intervals;
    summary.expected_rate = expected_sum / n_pairs;
    summary.actual_rate = static_cast<double>(positives) / n_pairs;
    summary.prone_label_rate =
        prone_count > 0 ? static_cast<double>(prone_positives) /
                              (static_cast<double>(prone_count) * cfg.intervals)
                        : 0.0;
    const int quiet_count = summary.cells - prone_count;
    summary.quiet_label_rate =
        quiet_count > 0 ? static_cast<double>(quiet_positives) /
                              (static_cast<double>(quiet_count) * cfg.intervals)
                        : 0.0;

    if (!paths.manifest_json.empty()) {
        nlohmann::ordered_json j;
        j["cells"] = summary.cells;
        j["prone_cells"] = summary.prone_cells;
        j["intervals"] = summary.intervals;
        j["events_written"] = summary.events_written;
        j["expected_rate"] = summary.expected_rate;
        j["actual_rate"] = summary.actual_rate;
        j["prone_label_rate"] = summary.prone_label_rate;
        j["quiet_label_rate"] = summary.quiet_label_rate;
        j["seed"] = cfg.seed;
        auto out = open_out(paths.manifest_json);
        out << j.dump(2) << "\n";
    }
    return summary;
}

}  // namespace roadcast::synth
