#include "roadcast/features.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "roadcast/rng.hpp"
#include "roadcast/timeutil.hpp"

namespace roadcast::features {

using json = nlohmann::ordered_json;

const std::array<std::string, kDim>& dimension_names() {
    static const std::array<std::string, kDim> names = [] {
        std::array<std::string, kDim> n;
        int i = 0;
        n[i++] = "temperature";
        n[i++] = "humidity";
        for (const char* s : {"light_rain", "moderate_rain", "heavy_rain", "light_snow",
                              "moderate_snow", "heavy_snow", "severe_cold", "severe_storm",
                              "severe_fog", "moderate_fog", "hail", "precipitation_other"})
            n[i++] = s;
        for (int k = 0; k < augment::kPoiTagCount; ++k)
            n[i++] = std::string("poi_") + augment::to_string(static_cast<augment::PoiTag>(k));
        for (int k = 0; k < augment::kRoadClassCount; ++k)
            n[i++] = std::string("road_") + augment::to_string(static_cast<augment::RoadClass>(k));
        for (const char* s : {"distance", "avg_speed", "travel_time", "traffic_impacted",
                              "severity"})
            n[i++] = s;
        return n;
    }();
    return names;
}

std::array<float, 12> weather_indicators(const augment::WeatherObservation& w) {
    using augment::WeatherCondition;
    std::array<float, 12> ind{};
    auto intensity = [&](int light, int moderate, int heavy) {
        if (w.precipitation_mm < 2.5) ind[light] = 1.f;
        else if (w.precipitation_mm < 7.6) ind[moderate] = 1.f;
        else ind[heavy] = 1.f;
    };
    switch (w.condition) {
        case WeatherCondition::Rain: intensity(0, 1, 2); break;
        case WeatherCondition::Snow: intensity(3, 4, 5); break;
        case WeatherCondition::Thunderstorm: ind[7] = 1.f; break;
        case WeatherCondition::Fog:
            if (w.visibility_mi < 0.5) ind[8] = 1.f;
            else if (w.visibility_mi < 2.0) ind[9] = 1.f;
            break;
        case WeatherCondition::Hail: ind[10] = 1.f; break;
        case WeatherCondition::Clear:
            if (w.precipitation_mm > 0.0) ind[11] = 1.f;
            break;
    }
    if (w.temperature_f <= -10.0) ind[6] = 1.f;
    return ind;
}

std::pair<FeatureVector, Label> aggregate(
    const std::vector<const augment::AugmentedEvent*>& events,
    const std::array<float, augment::kPoiTagCount>& poi_counts) {
    FeatureVector v;
    for (int k = 0; k < augment::kPoiTagCount; ++k) v.values[kPoiOffset + k] = poi_counts[k];
    if (events.empty()) return {v, 0};

    const float n = static_cast<float>(events.size());
    for (const auto* ep : events) {
        const auto& a = *ep;
        if (a.weather) {
            v.values[kWeatherOffset + 0] += static_cast<float>(a.weather->temperature_f);
            v.values[kWeatherOffset + 1] += static_cast<float>(a.weather->humidity_pct);
            const auto ind = weather_indicators(*a.weather);
            for (int k = 0; k < 12; ++k) v.values[kWeatherOffset + 2 + k] += ind[k];
        }
        v.values[kRoadTypeOffset + static_cast<int>(a.road_class)] += 1.f;
        v.values[kRoadInfoOffset + 0] += a.raw.distance_mi ? static_cast<float>(*a.raw.distance_mi) : 0.f;
        v.values[kRoadInfoOffset + 1] += static_cast<float>(a.avg_speed_mph);
        v.values[kRoadInfoOffset + 2] += static_cast<float>(a.travel_time_min);
        v.values[kRoadInfoOffset + 3] += a.closure != augment::ClosureType::NoClosure ? 1.f : 0.f;
        v.values[kRoadInfoOffset + 4] += static_cast<float>(a.raw.severity);
    }
    for (int k = 0; k < kDim; ++k) {
        if (k >= kPoiOffset && k < kPoiOffset + augment::kPoiTagCount) continue;
        v.values[k] /= n;
    }
    return {v, 1};
}

FeatureVector normalize(const NormStats& stats, const FeatureVector& v) {
    FeatureVector out;
    for (int k = 0; k < kDim; ++k) {
        const float lo = stats.min[k], hi = stats.max[k];
        if (hi <= lo) {
            out.values[k] = 0.f;
            continue;
        }
        float x = (v.values[k] - lo) / (hi - lo);
        out.values[k] = std::min(1.f, std::max(0.f, x));
    }
    return out;
}

FeatureStore build_store(const std::vector<augment::AugmentedEvent>& events,
                         const std::vector<augment::PoiRecord>& pois,
                         const grid::GridConfig& grid_cfg) {
    FeatureStore store;
    store.grid = grid_cfg;

    struct CellData {
        std::map<int, std::vector<const augment::AugmentedEvent*>> by_interval;
        std::array<float, augment::kPoiTagCount> poi_counts{};
    };
    std::map<grid::HexCell, CellData> cells;

    int min_iv = std::numeric_limits<int>::max();
    int max_iv = std::numeric_limits<int>::min();
    for (const auto& e : events) {
        const auto cell = grid::locate(grid_cfg, e.raw.start_lat, e.raw.start_lng);
        const int iv = grid::interval_of(grid_cfg, e.raw.start_time).index;
        cells[cell].by_interval[iv].push_back(&e);
        min_iv = std::min(min_iv, iv);
        max_iv = std::max(max_iv, iv);
    }
    if (cells.empty()) return store;

    for (const auto& p : pois) {
        if (!grid::in_domain(grid_cfg, p.lat, p.lng)) continue;
        const auto cell = grid::locate(grid_cfg, p.lat, p.lng);
        auto it = cells.find(cell);
        if (it != cells.end()) it->second.poi_counts[static_cast<int>(p.tag)] += 1.f;
    }

    store.first_interval = min_iv;
    store.interval_count = max_iv - min_iv + 1;

    for (auto& [cell, data] : cells) {
        CellSeries s;
        s.cell = cell;
        s.first_interval = min_iv;
        s.vectors.reserve(store.interval_count);
        s.labels.reserve(store.interval_count);
        static const std::vector<const augment::AugmentedEvent*> kNone;
        for (int iv = min_iv; iv <= max_iv; ++iv) {
            auto it = data.by_interval.find(iv);
            auto [vec, label] = aggregate(it == data.by_interval.end() ? kNone : it->second,
                                          data.poi_counts);
            s.vectors.push_back(vec);
            s.labels.push_back(label);
        }
        store.series.push_back(std::move(s));
    }

    // Normalization statistics come from the training date range only.
    bool any = false;
    for (const auto& s : store.series) {
        for (std::size_t k = 0; k < s.vectors.size(); ++k) {
            const int iv = s.first_interval + static_cast<int>(k);
            if (temporal_split_of(grid_cfg, iv) != Split::Train) continue;
            const auto& vals = s.vectors[k].values;
            if (!any) {
                std::copy(vals.begin(), vals.end(), store.norm.min.begin());
                std::copy(vals.begin(), vals.end(), store.norm.max.begin());
                any = true;
            } else {
                for (int d = 0; d < kDim; ++d) {
                    store.norm.min[d] = std::min(store.norm.min[d], vals[d]);
                    store.norm.max[d] = std::max(store.norm.max[d], vals[d]);
                }
            }
        }
    }
    return store;
}

// ------------------------------------------------------------------ store --

namespace {

template <typename T>
void put(std::ostream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out.write(reinterpret_cast<const char*>(&v), sizeof v);  // little-endian hosts only
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace

void save_store(const FeatureStore& store, const std::string& bin_path,
                const std::string& json_path) {
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("cannot write " + bin_path);
    std::size_t records = 0;
    for (const auto& s : store.series) {
        for (std::size_t k = 0; k < s.vectors.size(); ++k) {
            put<std::int32_t>(bin, s.cell.q);
            put<std::int32_t>(bin, s.cell.r);
            put<std::int32_t>(bin, s.first_interval + static_cast<int>(k));
            for (float f : s.vectors[k].values) put<float>(bin, f);
            put<std::uint8_t>(bin, s.labels[k]);
            ++records;
        }
    }
    bin.close();

    json j;
    j["format"] = "roadcast-features-1";
    j["record"] = "int32 q, int32 r, int32 interval, 59 float32, uint8 label (LE)";
    j["dims"] = dimension_names();
    j["grid"] = {{"origin_lat", store.grid.origin_lat},
                 {"origin_lng", store.grid.origin_lng},
                 {"hex_area_km2", store.grid.hex_area_km2},
                 {"epoch_start", timeutil::format_iso8601(store.grid.epoch_start)},
                 {"interval_days", store.grid.interval_days}};
    j["first_interval"] = store.first_interval;
    j["interval_count"] = store.interval_count;
    j["records"] = records;
    j["norm"] = {{"min", store.norm.min}, {"max", store.norm.max}};
    std::ofstream js(json_path);
    if (!js) throw std::runtime_error("cannot write " + json_path);
    js << j.dump(2) << "\n";
}

FeatureStore load_store(const std::string& bin_path, const std::string& json_path) {
    std::ifstream js(json_path);
    if (!js) throw std::runtime_error("missing feature sidecar: " + json_path);
    json j = json::parse(js);
    if (j.value("format", "") != "roadcast-features-1")
        throw std::runtime_error(json_path + ": unknown feature store format");

    FeatureStore store;
    const auto& g = j.at("grid");
    store.grid.origin_lat = g.at("origin_lat").get<double>();
    store.grid.origin_lng = g.at("origin_lng").get<double>();
    store.grid.hex_area_km2 = g.at("hex_area_km2").get<double>();
    auto epoch = timeutil::parse_iso8601(g.at("epoch_start").get<std::string>());
    if (!epoch) throw std::runtime_error(json_path + ": bad epoch_start");
    store.grid.epoch_start = *epoch;
    store.grid.interval_days = g.at("interval_days").get<int>();
    store.first_interval = j.at("first_interval").get<int>();
    store.interval_count = j.at("interval_count").get<int>();
    for (int d = 0; d < kDim; ++d) {
        store.norm.min[d] = j.at("norm").at("min").at(d).get<float>();
        store.norm.max[d] = j.at("norm").at("max").at(d).get<float>();
    }

    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("missing feature store: " + bin_path);
    const std::size_t records = j.at("records").get<std::size_t>();
    std::map<grid::HexCell, CellSeries> series;
    for (std::size_t i = 0; i < records; ++i) {
        const auto q = get<std::int32_t>(bin);
        const auto r = get<std::int32_t>(bin);
        const auto iv = get<std::int32_t>(bin);
        FeatureVector v;
        for (int d = 0; d < kDim; ++d) v.values[d] = get<float>(bin);
        const auto label = get<std::uint8_t>(bin);
        if (!bin) throw std::runtime_error(bin_path + ": truncated feature store");
        const grid::HexCell cell{q, r};
        auto& s = series[cell];
        if (s.vectors.empty()) {
            s.cell = cell;
            s.first_interval = iv;
        } else if (iv != s.first_interval + static_cast<int>(s.vectors.size())) {
            throw std::runtime_error(bin_path + ": non-contiguous intervals for cell " +
                                     grid::cell_id(cell));
        }
        s.vectors.push_back(v);
        s.labels.push_back(label);
    }
    for (auto& [cell, s] : series) store.series.push_back(std::move(s));
    return store;
}

// ---------------------------------------------------------------- windows --

std::vector<SampleWindow> build_windows(const CellSeries& series) {
    std::vector<SampleWindow> out;
    const int n = static_cast<int>(series.vectors.size());
    for (int t = kHistory; t < n; ++t) {
        SampleWindow w;
        w.cell = series.cell;
        w.target_interval = series.first_interval + t;
        for (int k = 0; k < kHistory; ++k) w.history[k] = series.vectors[t - kHistory + k];
        w.label = series.labels[t];
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<SampleWindow> build_windows(const FeatureStore& store) {
    std::vector<SampleWindow> out;
    for (const auto& s : store.series) {
        auto w = build_windows(s);
        out.insert(out.end(), w.begin(), w.end());
    }
    return out;
}

// ----------------------------------------------------------------- splits --

Split temporal_split_of(const grid::GridConfig& cfg, int target_interval) {
    const std::int64_t start = grid::interval_start(cfg, {target_interval});
    static const std::int64_t t_train_lo = timeutil::unix_from_civil(2016, 2, 1);
    static const std::int64_t t_val_lo = timeutil::unix_from_civil(2020, 1, 1);
    static const std::int64_t t_test_lo = timeutil::unix_from_civil(2020, 6, 1);
    static const std::int64_t t_test_hi = timeutil::unix_from_civil(2021, 1, 1);
    if (start < t_train_lo) return Split::None;
    if (start < t_val_lo) return Split::Train;
    if (start < t_test_lo) return Split::Val;
    if (start < t_test_hi) return Split::Test;
    return Split::None;
}

SplitWindows temporal_split(const grid::GridConfig& cfg, const std::vector<SampleWindow>& windows) {
    SplitWindows s;
    for (const auto& w : windows) {
        switch (temporal_split_of(cfg, w.target_interval)) {
            case Split::Train: s.train.push_back(w); break;
            case Split::Val: s.val.push_back(w); break;
            case Split::Test: s.test.push_back(w); break;
            case Split::None: break;
        }
    }
    return s;
}

CellSplit spatial_split(std::vector<grid::HexCell> cells, std::uint64_t seed) {
    if (cells.size() < 5) throw std::invalid_argument("spatial_split needs at least 5 cells");
    std::sort(cells.begin(), cells.end());
    rng::Rng r(rng::derive_seed(seed, "spatial_split"));
    r.shuffle(cells);

    const double n = static_cast<double>(cells.size());
    const double quota[3] = {0.6 * n, 0.2 * n, 0.2 * n};
    std::size_t take[3];
    double frac[3];
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        take[i] = static_cast<std::size_t>(quota[i]);
        frac[i] = quota[i] - static_cast<double>(take[i]);
        assigned += take[i];
    }
    while (assigned < cells.size()) {  // largest remainder; ties favour train, then val
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (frac[i] > frac[best]) best = i;
        ++take[best];
        frac[best] = -1.0;
        ++assigned;
    }

    CellSplit out;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < take[0]; ++i) out.train.push_back(cells[pos++]);
    for (std::size_t i = 0; i < take[1]; ++i) out.val.push_back(cells[pos++]);
    for (std::size_t i = 0; i < take[2]; ++i) out.test.push_back(cells[pos++]);
    return out;
}

SplitWindows split_by_cells(const CellSplit& cells, const std::vector<SampleWindow>& windows) {
    auto contains = [](const std::vector<grid::HexCell>& v, const grid::HexCell& c) {
        return std::find(v.begin(), v.end(), c) != v.end();
    };
    SplitWindows s;
    for (const auto& w : windows) {
        if (contains(cells.train, w.cell)) s.train.push_back(w);
        else if (contains(cells.val, w.cell)) s.val.push_back(w);
        else if (contains(cells.test, w.cell)) s.test.push_back(w);
    }
    return s;
}

}  // namespace roadcast::features
