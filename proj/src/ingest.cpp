#include "roadcast/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "roadcast/csv.hpp"
#include "roadcast/geo.hpp"
#include "roadcast/timeutil.hpp"

namespace roadcast::ingest {

const char* to_string(Source s) { return s == Source::MapQuest ? "MapQuest" : "Bing"; }

std::optional<Source> source_from_string(const std::string& s) {
    if (s == "MapQuest") return Source::MapQuest;
    if (s == "Bing") return Source::Bing;
    return std::nullopt;
}

namespace {

std::optional<double> parse_num(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

ParseResult parse_events(std::istream& in) {
    ParseResult result;
    csv::Reader reader(in);

    static const char* kRequired[] = {"id",        "source",    "severity", "start_time",
                                      "end_time",  "start_lat", "start_lng", "end_lat",
                                      "end_lng",   "distance",  "description"};
    for (const char* name : kRequired) {
        if (reader.column(name) < 0) {
            result.errors.push_back({1, std::string("missing required column: ") + name});
            return result;
        }
    }
    const int c_id = reader.column("id"), c_source = reader.column("source");
    const int c_sev = reader.column("severity"), c_start = reader.column("start_time");
    const int c_end = reader.column("end_time"), c_slat = reader.column("start_lat");
    const int c_slng = reader.column("start_lng"), c_elat = reader.column("end_lat");
    const int c_elng = reader.column("end_lng"), c_dist = reader.column("distance");
    const int c_desc = reader.column("description");
    const int c_city = reader.column("city"), c_state = reader.column("state");

    std::unordered_set<std::string> seen_ids;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const std::size_t line = reader.line();
        auto fail = [&](const std::string& why) { result.errors.push_back({line, why}); };
        auto field = [&](int c) -> const std::string& {
            static const std::string empty;
            return c >= 0 && c < static_cast<int>(f.size()) ? f[c] : empty;
        };
        if (f.size() < 11) {
            fail("too few columns");
            continue;
        }

        RawEvent e;
        e.id = field(c_id);
        if (e.id.empty()) {
            fail("empty id");
            continue;
        }
        if (!seen_ids.insert(e.id).second) {
            fail("duplicate id: " + e.id);
            continue;
        }
        auto src = source_from_string(field(c_source));
        if (!src) {
            fail("unknown source: " + field(c_source));
            continue;
        }
        e.source = *src;
        auto sev = parse_num(field(c_sev));
        if (!sev || *sev != std::floor(*sev) || *sev < 1 || *sev > 4) {
            fail("severity out of range: " + field(c_sev));
            continue;
        }
        e.severity = static_cast<int>(*sev);
        auto st = timeutil::parse_iso8601(field(c_start));
        if (!st) {
            fail("malformed timestamp: " + field(c_start));
            continue;
        }
        e.start_time = *st;
        if (!field(c_end).empty()) {
            auto et = timeutil::parse_iso8601(field(c_end));
            if (!et) {
                fail("malformed timestamp: " + field(c_end));
                continue;
            }
            if (*et < e.start_time) {
                fail("end_time before start_time");
                continue;
            }
            e.end_time = *et;
        }
        auto slat = parse_num(field(c_slat)), slng = parse_num(field(c_slng));
        if (!slat || *slat < -90.0 || *slat > 90.0) {
            fail("out-of-range coordinate: start_lat " + field(c_slat));
            continue;
        }
        if (!slng || *slng < -180.0 || *slng > 180.0) {
            fail("out-of-range coordinate: start_lng " + field(c_slng));
            continue;
        }
        e.start_lat = *slat;
        e.start_lng = *slng;
        const std::string& elat_s = field(c_elat);
        const std::string& elng_s = field(c_elng);
        if (elat_s.empty() != elng_s.empty()) {
            fail("end_lat/end_lng must be both present or both absent");
            continue;
        }
        if (!elat_s.empty()) {
            auto elat = parse_num(elat_s), elng = parse_num(elng_s);
            if (!elat || *elat < -90.0 || *elat > 90.0) {
                fail("out-of-range coordinate: end_lat " + elat_s);
                continue;
            }
            if (!elng || *elng < -180.0 || *elng > 180.0) {
                fail("out-of-range coordinate: end_lng " + elng_s);
                continue;
            }
            e.end_lat = *elat;
            e.end_lng = *elng;
        }
        if (!field(c_dist).empty()) {
            auto dist = parse_num(field(c_dist));
            if (!dist || *dist < 0.0) {
                fail("negative or malformed distance: " + field(c_dist));
                continue;
            }
            e.distance_mi = *dist;
        }
        e.description = field(c_desc);
        e.city = field(c_city);
        e.state = field(c_state);
        result.events.push_back(std::move(e));
    }
    return result;
}

std::vector<RawEvent> dedup(const std::vector<RawEvent>& events, const DedupConfig& cfg) {
    const std::size_t n = events.size();
    // Preference order: longer description, then smaller id, then input order.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ea = events[a];
        const auto& eb = events[b];
        if (ea.description.size() != eb.description.size())
            return ea.description.size() > eb.description.size();
        if (ea.id != eb.id) return ea.id < eb.id;
        return a < b;
    });

    const std::int64_t window_s = static_cast<std::int64_t>(cfg.window_minutes * 60.0);
    // Kept events bucketed by time window so each candidate only scans
    // neighbours within the temporal threshold.
    std::map<std::int64_t, std::vector<std::size_t>> kept_by_bucket;
    std::vector<bool> kept(n, false);
    const std::int64_t bucket_w = std::max<std::int64_t>(1, window_s);

    for (std::size_t idx : order) {
        const auto& e = events[idx];
        const std::int64_t b = e.start_time / bucket_w - (e.start_time < 0 ? 1 : 0);
        bool duplicate = false;
        for (std::int64_t nb = b - 1; nb <= b + 1 && !duplicate; ++nb) {
            auto it = kept_by_bucket.find(nb);
            if (it == kept_by_bucket.end()) continue;
            for (std::size_t k : it->second) {
                const auto& other = events[k];
                if (std::llabs(other.start_time - e.start_time) > window_s) continue;
                if (geo::haversine_m(e.start_lat, e.start_lng, other.start_lat,
                                     other.start_lng) <= cfg.radius_m) {
                    duplicate = true;
                    break;
                }
            }
        }
        if (!duplicate) {
            kept[idx] = true;
            kept_by_bucket[b].push_back(idx);
        }
    }

    std::vector<RawEvent> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (kept[i]) out.push_back(events[i]);
    return out;
}

}  // namespace roadcast::ingest
