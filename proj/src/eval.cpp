#include "roadcast/eval.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "roadcast/timeutil.hpp"

namespace roadcast::eval {

using json = nlohmann::ordered_json;

Metrics compute_metrics(const std::vector<float>& probs, const std::vector<int>& labels,
                        double threshold) {
    if (probs.empty() || probs.size() != labels.size())
        throw std::invalid_argument("compute_metrics needs equal, non-empty prob/label lists");
    Metrics m;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const int pred = probs[i] >= threshold ? 1 : 0;
        if (pred == 1 && labels[i] == 1) ++m.tp;
        else if (pred == 1 && labels[i] == 0) ++m.fp;
        else if (pred == 0 && labels[i] == 0) ++m.tn;
        else ++m.fn;
    }
    const double total = static_cast<double>(probs.size());
    m.accuracy = static_cast<double>(m.tp + m.tn) / total;
    m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
    m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
    m.f1 = (2 * m.tp + m.fp + m.fn) > 0 ? 2.0 * m.tp / (2.0 * m.tp + m.fp + m.fn) : 0.0;
    return m;
}

double macro_f1(const std::vector<float>& probs, const std::vector<int>& labels,
                double threshold) {
    const Metrics m = compute_metrics(probs, labels, threshold);
    // negative class scores are the positive scores of the flipped problem
    const double f1_neg =
        (2 * m.tn + m.fn + m.fp) > 0 ? 2.0 * m.tn / (2.0 * m.tn + m.fn + m.fp) : 0.0;
    return 0.5 * (m.f1 + f1_neg);
}

std::string metrics_table(const std::vector<std::pair<std::string, Metrics>>& rows) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s %9s %9s %9s %9s %6s %6s %6s %6s\n", "model", "f1",
                  "accuracy", "precision", "recall", "tp", "fp", "tn", "fn");
    out << buf;
    for (const auto& [name, m] : rows) {
        std::snprintf(buf, sizeof buf, "%-10s %9.4f %9.4f %9.4f %9.4f %6lld %6lld %6lld %6lld\n",
                      name.c_str(), m.f1, m.accuracy, m.precision, m.recall,
                      static_cast<long long>(m.tp), static_cast<long long>(m.fp),
                      static_cast<long long>(m.tn), static_cast<long long>(m.fn));
        out << buf;
    }
    return out.str();
}

std::string metrics_csv(const std::vector<std::pair<std::string, Metrics>>& rows) {
    std::ostringstream out;
    out << "model,f1,accuracy,precision,recall,tp,fp,tn,fn\n";
    for (const auto& [name, m] : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%lld,%lld,%lld,%lld\n", name.c_str(),
                      m.f1, m.accuracy, m.precision, m.recall, static_cast<long long>(m.tp),
                      static_cast<long long>(m.fp), static_cast<long long>(m.tn),
                      static_cast<long long>(m.fn));
        out << buf;
    }
    return out.str();
}

// ------------------------------------------------------------- statistics --

DatasetStats compute_dataset_stats(const std::vector<augment::AugmentedEvent>& events) {
    DatasetStats s;
    s.total = static_cast<std::int64_t>(events.size());
    for (const char* c : {"road", "lane", "none"}) s.closure_counts[c] = 0;

    static const std::vector<std::pair<const char*, double>> kFineBinsH = {
        {"<1h", 1.0},     {"1-3h", 3.0},    {"3-6h", 6.0},     {"6-12h", 12.0},
        {"12-24h", 24.0}, {"1-3d", 72.0},   {"3-7d", 168.0},   {"7-15d", 360.0},
        {"15-30d", 720.0}, {">=30d", 1e18}};

    for (const auto& a : events) {
        const auto& e = a.raw;
        s.monthly_starts[timeutil::utc_month(e.start_time) - 1]++;
        if (e.end_time) s.monthly_ends[timeutil::utc_month(*e.end_time) - 1]++;
        s.closure_counts[augment::to_string(a.closure)]++;
        s.road_class_counts[augment::to_string(a.road_class)]++;
        for (int k = 0; k < augment::kPoiTagCount; ++k)
            if (a.poi_flags[k])
                s.poi_counts[augment::to_string(static_cast<augment::PoiTag>(k))]++;
        if (!e.end_time) {
            s.duration_unknown++;
        } else {
            const double hours = static_cast<double>(*e.end_time - e.start_time) / 3600.0;
            if (hours < 24.0) s.short_term++;
            else if (hours < 15.0 * 24.0) s.medium_term++;
            else s.long_term++;
            for (const auto& [label, hi] : kFineBinsH) {
                if (hours < hi) {
                    s.duration_fine[label]++;
                    break;
                }
            }
        }
        for (int k = 0; k < 4; ++k)
            if (a.daylight[k]) s.daylight_day_counts[k]++;
        if (!e.state.empty()) s.state_counts[e.state]++;
        if (!e.city.empty()) s.city_counts[e.city]++;
    }
    return s;
}

std::string stats_json(const DatasetStats& s) {
    json j;
    j["total"] = s.total;
    j["monthly_starts"] = s.monthly_starts;
    j["monthly_ends"] = s.monthly_ends;
    j["closure_counts"] = s.closure_counts;
    j["road_class_counts"] = s.road_class_counts;
    j["poi_counts"] = s.poi_counts;
    j["duration"] = {{"unknown", s.duration_unknown},
                     {"short_term_lt_24h", s.short_term},
                     {"medium_term_1_to_15d", s.medium_term},
                     {"long_term_ge_15d", s.long_term},
                     {"fine", s.duration_fine}};
    j["daylight_day_counts"] = {{"sunrise_sunset", s.daylight_day_counts[0]},
                                {"civil", s.daylight_day_counts[1]},
                                {"nautical", s.daylight_day_counts[2]},
                                {"astronomical", s.daylight_day_counts[3]}};
    j["state_counts"] = s.state_counts;
    j["city_counts"] = s.city_counts;
    return j.dump(2);
}

std::string stats_text(const DatasetStats& s) {
    std::ostringstream out;
    out << "events: " << s.total << "\n";
    out << "closures: road " << s.closure_counts.at("road") << ", lane "
        << s.closure_counts.at("lane") << ", none " << s.closure_counts.at("none") << "\n";
    out << "duration: <24h " << s.short_term << ", 1-15d " << s.medium_term << ", >=15d "
        << s.long_term << ", unknown " << s.duration_unknown << "\n";
    out << "daylight (day share): ";
    const char* names[4] = {"sunrise/sunset", "civil", "nautical", "astronomical"};
    for (int k = 0; k < 4; ++k) {
        out << names[k] << " "
            << (s.total ? 100.0 * static_cast<double>(s.daylight_day_counts[k]) /
                              static_cast<double>(s.total)
                        : 0.0)
            << "%" << (k < 3 ? ", " : "\n");
    }
    out << "monthly starts:";
    for (int m = 0; m < 12; ++m) out << " " << s.monthly_starts[m];
    out << "\n";
    return out.str();
}

// ---------------------------------------------------------------- geojson --

std::string export_geojson(const grid::GridConfig& cfg, int interval_index,
                           const std::vector<CellPrediction>& predictions) {
    json features = json::array();
    for (const auto& p : predictions) {
        const auto ring = grid::cell_polygon(cfg, p.cell);
        json coords = json::array();
        for (const auto& v : ring) coords.push_back({v.lng, v.lat});
        coords.push_back({ring[0].lng, ring[0].lat});  // close the ring

        json props;
        props["cell_id"] = grid::cell_id(p.cell);
        props["interval_index"] = interval_index;
        props["predicted"] = p.predicted;
        if (p.actual) props["actual"] = *p.actual;
        else props["actual"] = nullptr;
        props["color"] = p.predicted ? "red" : "green";

        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({coords})}}},
                            {"properties", props}});
    }
    json fc = {{"type", "FeatureCollection"}, {"features", features}};
    return fc.dump(2);
}

// -------------------------------------------------------------- scenarios --

ScenarioResult run_scenario1(const features::SplitWindows& splits, const models::Dataset& data,
                             const std::vector<models::ModelKind>& kinds,
                             const models::DrcpConfig& drcp_cfg, const models::TrainConfig& tc,
                             std::vector<std::unique_ptr<models::Model>>* out_models) {
    ScenarioResult result;
    std::vector<int> test_labels;
    test_labels.reserve(splits.test.size());
    for (const auto& w : splits.test) test_labels.push_back(w.label);

    for (auto kind : kinds) {
        auto model = kind == models::ModelKind::Drcp
                         ? models::build_drcp(drcp_cfg, tc, tc.seed)
                         : models::build_baseline(kind, tc, tc.seed);
        auto history = models::train(*model, data, tc);
        const auto probs = models::predict(*model, data, splits.test);
        ScenarioRow row;
        row.model = models::to_string(kind);
        row.metrics = compute_metrics(probs, test_labels);
        result.rows.push_back(row);
        result.histories.push_back(std::move(history));
        if (out_models) out_models->push_back(std::move(model));
    }
    return result;
}

ScenarioResult run_scenario2(const std::vector<features::SampleWindow>& windows,
                             const std::vector<grid::HexCell>& cells, const models::Dataset& base,
                             const models::DrcpConfig& drcp_cfg, const models::TrainConfig& tc,
                             std::uint64_t seed,
                             std::vector<std::unique_ptr<models::Model>>* out_models) {
    const auto cell_split = features::spatial_split(cells, seed);
    const auto splits = features::split_by_cells(cell_split, windows);

    models::Dataset data = base;
    data.splits = &splits;

    ScenarioResult result;
    auto model = models::build_drcp(drcp_cfg, tc, tc.seed);
    auto history = models::train(*model, data, tc);
    const auto probs = models::predict(*model, data, splits.test);
    std::vector<int> labels;
    labels.reserve(splits.test.size());
    for (const auto& w : splits.test) labels.push_back(w.label);
    ScenarioRow row;
    row.model = "drcp";
    row.metrics = compute_metrics(probs, labels);
    result.rows.push_back(row);
    result.histories.push_back(std::move(history));
    if (out_models) out_models->push_back(std::move(model));
    return result;
}

}  // namespace roadcast::eval
