#include "roadcast/augment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "roadcast/csv.hpp"
#include "roadcast/solar.hpp"
#include "roadcast/timeutil.hpp"

namespace roadcast::augment {

// ---------------------------------------------------------------- closure --

const char* to_string(ClosureType c) {
    switch (c) {
        case ClosureType::RoadClosure: return "road";
        case ClosureType::LaneClosure: return "lane";
        default: return "none";
    }
}

std::optional<ClosureType> closure_from_string(const std::string& s) {
    if (s == "road") return ClosureType::RoadClosure;
    if (s == "lane") return ClosureType::LaneClosure;
    if (s == "none") return ClosureType::NoClosure;
    return std::nullopt;
}

namespace {

struct PatternToken {
    enum Kind { Gap, Prefix, Literal } kind;
    std::string text;
};

using Pattern = std::vector<PatternToken>;

Pattern compile_pattern(const std::string& spec) {
    Pattern p;
    std::string tok;
    auto flush = [&] {
        if (tok.empty()) return;
        if (tok == "*") p.push_back({PatternToken::Gap, ""});
        else if (tok.back() == '*') p.push_back({PatternToken::Prefix, tok.substr(0, tok.size() - 1)});
        else p.push_back({PatternToken::Literal, tok});
        tok.clear();
    };
    for (char c : spec) {
        if (c == ' ') flush();
        else tok.push_back(c);
    }
    flush();
    // Leading/trailing gaps only say "anywhere in the text", which the
    // sliding start position already provides.
    while (!p.empty() && p.front().kind == PatternToken::Gap) p.erase(p.begin());
    while (!p.empty() && p.back().kind == PatternToken::Gap) p.pop_back();
    return p;
}

// The 14 patterns, road closures first. Duplicates between the two data
// sources are kept verbatim; they are harmless.
const std::vector<std::pair<Pattern, ClosureType>>& patterns() {
    static const std::vector<std::pair<Pattern, ClosureType>> pats = [] {
        std::vector<std::pair<Pattern, ClosureType>> v;
        const char* road[] = {"close* * roadwork", "close* * bridge", "close* * roadwork",
                              "road close* *"};
        const char* lane[] = {"hard shoulder close*", "* lane* block*", "* reduced * lane*",
                              "* lane* close*",       "* lane closure*", "hard shoulder block*",
                              "* reduced * lane*",    "* lane* block*",  "* lane* close*",
                              "* shoulder close*"};
        for (const char* s : road) v.push_back({compile_pattern(s), ClosureType::RoadClosure});
        for (const char* s : lane) v.push_back({compile_pattern(s), ClosureType::LaneClosure});
        return v;
    }();
    return pats;
}

std::vector<std::string> tokenize_lower(const std::string& text) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

bool token_matches(const PatternToken& t, const std::string& word) {
    if (t.kind == PatternToken::Literal) return word == t.text;
    return word.size() >= t.text.size() && word.compare(0, t.text.size(), t.text) == 0;
}

bool match_from(const Pattern& p, std::size_t pi, const std::vector<std::string>& w,
                std::size_t wi) {
    if (pi == p.size()) return true;
    if (p[pi].kind == PatternToken::Gap) {
        for (std::size_t skip = wi; skip <= w.size(); ++skip)
            if (match_from(p, pi + 1, w, skip)) return true;
        return false;
    }
    return wi < w.size() && token_matches(p[pi], w[wi]) && match_from(p, pi + 1, w, wi + 1);
}

bool pattern_matches(const Pattern& p, const std::vector<std::string>& words) {
    if (p.empty()) return false;
    for (std::size_t start = 0; start < words.size(); ++start)
        if (match_from(p, 0, words, start)) return true;
    return false;
}

}  // namespace

ClosureType annotate_closure(const std::string& description) {
    const auto words = tokenize_lower(description);
    for (const auto& [pattern, type] : patterns())
        if (pattern_matches(pattern, words)) return type;
    return ClosureType::NoClosure;
}

// ---------------------------------------------------------------- weather --

const char* to_string(WeatherCondition c) {
    switch (c) {
        case WeatherCondition::Clear: return "clear";
        case WeatherCondition::Snow: return "snow";
        case WeatherCondition::Rain: return "rain";
        case WeatherCondition::Fog: return "fog";
        case WeatherCondition::Hail: return "hail";
        default: return "thunderstorm";
    }
}

std::optional<WeatherCondition> condition_from_string(const std::string& s) {
    if (s == "clear") return WeatherCondition::Clear;
    if (s == "snow") return WeatherCondition::Snow;
    if (s == "rain") return WeatherCondition::Rain;
    if (s == "fog") return WeatherCondition::Fog;
    if (s == "hail") return WeatherCondition::Hail;
    if (s == "thunderstorm") return WeatherCondition::Thunderstorm;
    return std::nullopt;
}

WeatherTable::WeatherTable(std::vector<WeatherObservation> observations)
    : observations_(std::move(observations)) {
    std::map<std::string, Station> by_id;
    for (std::size_t i = 0; i < observations_.size(); ++i) {
        const auto& o = observations_[i];
        auto& st = by_id[o.station_id];
        st.id = o.station_id;
        st.lat = o.station_lat;
        st.lng = o.station_lng;
        st.obs.push_back(i);
    }
    for (auto& [id, st] : by_id) {
        std::sort(st.obs.begin(), st.obs.end(), [&](std::size_t a, std::size_t b) {
            if (observations_[a].time != observations_[b].time)
                return observations_[a].time < observations_[b].time;
            return a < b;
        });
        stations_.push_back(std::move(st));
    }
}

std::optional<WeatherObservation> WeatherTable::snapshot(double lat, double lng,
                                                         std::int64_t when) const {
    if (stations_.empty()) return std::nullopt;
    const Station* best = nullptr;
    double best_d = 0.0;
    for (const auto& st : stations_) {  // stations_ sorted by id; strict < keeps smaller id on ties
        const double d = geo::haversine_m(lat, lng, st.lat, st.lng);
        if (!best || d < best_d) {
            best = &st;
            best_d = d;
        }
    }
    const auto& obs = best->obs;
    // binary search over time; compare the two neighbours, earlier wins ties
    std::size_t lo = 0, hi = obs.size();
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (observations_[obs[mid]].time < when) lo = mid + 1;
        else hi = mid;
    }
    std::size_t pick;
    if (lo == 0) pick = obs[0];
    else if (lo == obs.size()) pick = obs.back();
    else {
        const std::int64_t d_prev = when - observations_[obs[lo - 1]].time;
        const std::int64_t d_next = observations_[obs[lo]].time - when;
        pick = (d_prev <= d_next) ? obs[lo - 1] : obs[lo];
    }
    return observations_[pick];
}

// -------------------------------------------------------------------- POI --

namespace {
const char* kPoiNames[kPoiTagCount] = {
    "amenity", "bump",      "crossing",       "junction",       "no_exit",
    "railway", "roundabout", "station",       "stop",           "traffic_calming",
    "traffic_signal", "turning_loop", "entrance", "give_way",   "turning_circle"};
}

const char* to_string(PoiTag t) { return kPoiNames[static_cast<int>(t)]; }

std::optional<PoiTag> poi_tag_from_string(const std::string& s) {
    for (int i = 0; i < kPoiTagCount; ++i)
        if (s == kPoiNames[i]) return static_cast<PoiTag>(i);
    return std::nullopt;
}

PoiSet::PoiSet(std::vector<PoiRecord> pois) : pois_(std::move(pois)), index_(0.01) {
    for (std::size_t i = 0; i < pois_.size(); ++i) index_.add(pois_[i].lat, pois_[i].lng, i);
}

std::array<bool, kPoiTagCount> PoiSet::flags_near(double lat, double lng, double tau_m) const {
    std::array<bool, kPoiTagCount> flags{};
    for (const auto& [idx, dist] : index_.within(lat, lng, tau_m))
        flags[static_cast<int>(pois_[idx].tag)] = true;
    return flags;
}

// ------------------------------------------------------------- road class --

namespace {
const char* kRoadClassNames[kRoadClassCount] = {
    "motorway",      "trunk",          "primary",        "secondary",     "tertiary",
    "residential",   "service",        "motorway_link",  "trunk_link",    "primary_link",
    "secondary_link", "tertiary_link", "unclassified",   "living_street", "pedestrian",
    "track",         "busway",         "footway",        "bridleway",     "steps",
    "path",          "cycleway",       "construction",   "road",          "other"};
}

const char* to_string(RoadClass c) { return kRoadClassNames[static_cast<int>(c)]; }

std::optional<RoadClass> road_class_from_string(const std::string& s) {
    for (int i = 0; i < kRoadClassCount; ++i)
        if (s == kRoadClassNames[i]) return static_cast<RoadClass>(i);
    return std::nullopt;
}

double class_default_speed_mph(RoadClass c) {
    switch (c) {
        case RoadClass::Motorway: return 65.0;
        case RoadClass::Trunk: return 55.0;
        case RoadClass::Primary: return 45.0;
        case RoadClass::Secondary: return 40.0;
        case RoadClass::Tertiary: return 35.0;
        case RoadClass::Residential: return 25.0;
        default: return 25.0;
    }
}

RoadNetwork::RoadNetwork(std::vector<RoadNode> nodes, std::vector<RoadWay> ways)
    : nodes_(std::move(nodes)), ways_(std::move(ways)), node_index_(0.005) {
    std::unordered_map<std::int64_t, std::size_t> node_pos;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        node_index_.add(nodes_[i].lat, nodes_[i].lng, i);
        node_pos[nodes_[i].node_id] = i;
    }
    ways_of_node_.resize(nodes_.size());
    for (std::size_t w = 0; w < ways_.size(); ++w) {
        for (std::int64_t nid : ways_[w].node_ids) {
            auto it = node_pos.find(nid);
            if (it != node_pos.end()) ways_of_node_[it->second].push_back(w);
        }
    }
}

RoadNetwork::Match RoadNetwork::match(double start_lat, double start_lng,
                                      std::optional<double> end_lat,
                                      std::optional<double> end_lng,
                                      const RoadMatchConfig& cfg) const {
    Match m;
    // "S nearest then prune beyond D" equals "up to S nearest within D".
    std::vector<std::size_t> survivors;
    auto take = [&](double lat, double lng) {
        for (const auto& [idx, dist] :
             node_index_.nearest_within(lat, lng, static_cast<std::size_t>(cfg.s_nearest),
                                        cfg.distance_m))
            survivors.push_back(idx);
    };
    take(start_lat, start_lng);
    if (end_lat && end_lng) take(*end_lat, *end_lng);
    std::sort(survivors.begin(), survivors.end());
    survivors.erase(std::unique(survivors.begin(), survivors.end()), survivors.end());

    for (std::size_t n : survivors)
        for (std::size_t w : ways_of_node_[n]) m.way_indices.push_back(w);
    std::sort(m.way_indices.begin(), m.way_indices.end());
    m.way_indices.erase(std::unique(m.way_indices.begin(), m.way_indices.end()),
                        m.way_indices.end());

    if (m.way_indices.empty()) {
        m.road_class = RoadClass::Other;
        m.resolved = false;
        return m;
    }
    std::array<int, kRoadClassCount> counts{};
    for (std::size_t w : m.way_indices) counts[static_cast<int>(ways_[w].road_class)]++;
    int best = 0;
    for (int i = 1; i < kRoadClassCount; ++i)
        if (counts[i] > counts[best]) best = i;  // ties keep the smaller ordinal
    m.road_class = static_cast<RoadClass>(best);
    m.resolved = true;
    return m;
}

double infer_avg_speed(const RoadNetwork& network, const RoadNetwork::Match& match) {
    double sum = 0.0;
    int declared = 0;
    for (std::size_t w : match.way_indices) {
        if (network.ways()[w].maxspeed_mph) {
            sum += *network.ways()[w].maxspeed_mph;
            ++declared;
        }
    }
    if (declared > 0) return sum / declared;
    return class_default_speed_mph(match.road_class);
}

// ---------------------------------------------------------------- records --

AugmentedEvent augment_event(const ingest::RawEvent& event, const WeatherTable& weather,
                             const PoiSet& pois, const RoadNetwork& network,
                             const AugmentConfig& cfg) {
    AugmentedEvent a;
    a.raw = event;
    a.closure = annotate_closure(event.description);
    a.weather = weather.snapshot(event.start_lat, event.start_lng, event.start_time);
    a.poi_flags = pois.flags_near(event.start_lat, event.start_lng, cfg.poi_tau_m);
    a.daylight = solar::period_of_day(event.start_lat, event.start_lng, event.start_time);
    const auto match =
        network.match(event.start_lat, event.start_lng, event.end_lat, event.end_lng,
                      cfg.road_match);
    a.road_class = match.road_class;
    a.road_class_resolved = match.resolved;
    a.avg_speed_mph = infer_avg_speed(network, match);
    a.travel_time_min = event.distance_mi ? *event.distance_mi / a.avg_speed_mph * 60.0 : 0.0;
    return a;
}

// ------------------------------------------------------- reference file IO --

namespace {

double require_num(const std::string& s, const char* what, std::size_t line) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
        throw std::runtime_error(std::string(what) + ": bad number '" + s + "' at line " +
                                 std::to_string(line));
    return v;
}

std::int64_t require_time(const std::string& s, const char* what, std::size_t line) {
    auto t = timeutil::parse_iso8601(s);
    if (!t)
        throw std::runtime_error(std::string(what) + ": bad timestamp '" + s + "' at line " +
                                 std::to_string(line));
    return *t;
}

int require_col(const csv::Reader& r, const char* name, const char* file) {
    int c = r.column(name);
    if (c < 0) throw std::runtime_error(std::string(file) + ": missing column " + name);
    return c;
}

}  // namespace

std::vector<WeatherObservation> load_weather_csv(std::istream& in) {
    csv::Reader r(in);
    const int c_sid = require_col(r, "station_id", "weather.csv");
    const int c_lat = require_col(r, "station_lat", "weather.csv");
    const int c_lng = require_col(r, "station_lng", "weather.csv");
    const int c_time = require_col(r, "time", "weather.csv");
    const int c_temp = require_col(r, "temperature", "weather.csv");
    const int c_chill = require_col(r, "wind_chill", "weather.csv");
    const int c_hum = require_col(r, "humidity", "weather.csv");
    const int c_press = require_col(r, "pressure", "weather.csv");
    const int c_vis = require_col(r, "visibility", "weather.csv");
    const int c_wdir = require_col(r, "wind_direction", "weather.csv");
    const int c_wspd = require_col(r, "wind_speed", "weather.csv");
    const int c_prec = require_col(r, "precipitation", "weather.csv");
    const int c_cond = require_col(r, "condition", "weather.csv");

    std::vector<WeatherObservation> out;
    std::vector<std::string> f;
    while (r.next(f)) {
        WeatherObservation o;
        o.station_id = f[c_sid];
        o.station_lat = require_num(f[c_lat], "weather.csv", r.line());
        o.station_lng = require_num(f[c_lng], "weather.csv", r.line());
        o.time = require_time(f[c_time], "weather.csv", r.line());
        o.temperature_f = require_num(f[c_temp], "weather.csv", r.line());
        if (!f[c_chill].empty()) o.wind_chill_f = require_num(f[c_chill], "weather.csv", r.line());
        o.humidity_pct = require_num(f[c_hum], "weather.csv", r.line());
        if (o.humidity_pct < 0 || o.humidity_pct > 100)
            throw std::runtime_error("weather.csv: humidity outside [0,100] at line " +
                                     std::to_string(r.line()));
        o.pressure_inhg = require_num(f[c_press], "weather.csv", r.line());
        o.visibility_mi = require_num(f[c_vis], "weather.csv", r.line());
        o.wind_direction = f[c_wdir];
        o.wind_speed_mph = require_num(f[c_wspd], "weather.csv", r.line());
        o.precipitation_mm = require_num(f[c_prec], "weather.csv", r.line());
        if (o.precipitation_mm < 0)
            throw std::runtime_error("weather.csv: negative precipitation at line " +
                                     std::to_string(r.line()));
        auto cond = condition_from_string(f[c_cond]);
        if (!cond)
            throw std::runtime_error("weather.csv: unknown condition '" + f[c_cond] +
                                     "' at line " + std::to_string(r.line()));
        o.condition = *cond;
        out.push_back(std::move(o));
    }
    return out;
}

std::vector<PoiRecord> load_poi_csv(std::istream& in) {
    csv::Reader r(in);
    const int c_lat = require_col(r, "lat", "poi.csv");
    const int c_lng = require_col(r, "lng", "poi.csv");
    const int c_tag = require_col(r, "tag", "poi.csv");
    std::vector<PoiRecord> out;
    std::vector<std::string> f;
    while (r.next(f)) {
        PoiRecord p;
        p.lat = require_num(f[c_lat], "poi.csv", r.line());
        p.lng = require_num(f[c_lng], "poi.csv", r.line());
        auto tag = poi_tag_from_string(f[c_tag]);
        if (!tag)
            throw std::runtime_error("poi.csv: unknown tag '" + f[c_tag] + "' at line " +
                                     std::to_string(r.line()));
        p.tag = *tag;
        out.push_back(p);
    }
    return out;
}

std::vector<RoadNode> load_nodes_csv(std::istream& in) {
    csv::Reader r(in);
    const int c_id = require_col(r, "node_id", "nodes.csv");
    const int c_lat = require_col(r, "lat", "nodes.csv");
    const int c_lng = require_col(r, "lng", "nodes.csv");
    std::vector<RoadNode> out;
    std::vector<std::string> f;
    while (r.next(f)) {
        RoadNode n;
        n.node_id = static_cast<std::int64_t>(require_num(f[c_id], "nodes.csv", r.line()));
        n.lat = require_num(f[c_lat], "nodes.csv", r.line());
        n.lng = require_num(f[c_lng], "nodes.csv", r.line());
        out.push_back(n);
    }
    return out;
}

std::vector<RoadWay> load_ways_csv(std::istream& in) {
    csv::Reader r(in);
    const int c_id = require_col(r, "way_id", "ways.csv");
    const int c_class = require_col(r, "road_class", "ways.csv");
    const int c_speed = require_col(r, "maxspeed", "ways.csv");
    const int c_nodes = require_col(r, "node_ids", "ways.csv");
    std::vector<RoadWay> out;
    std::vector<std::string> f;
    while (r.next(f)) {
        RoadWay w;
        w.way_id = static_cast<std::int64_t>(require_num(f[c_id], "ways.csv", r.line()));
        auto cls = road_class_from_string(f[c_class]);
        if (!cls)
            throw std::runtime_error("ways.csv: unknown road_class '" + f[c_class] +
                                     "' at line " + std::to_string(r.line()));
        w.road_class = *cls;
        if (!f[c_speed].empty())
            w.maxspeed_mph = require_num(f[c_speed], "ways.csv", r.line());
        std::string cur;
        for (char ch : f[c_nodes]) {
            if (ch == '|') {
                if (!cur.empty()) w.node_ids.push_back(std::stoll(cur));
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        if (!cur.empty()) w.node_ids.push_back(std::stoll(cur));
        if (w.node_ids.size() < 2)
            throw std::runtime_error("ways.csv: way needs at least 2 nodes at line " +
                                     std::to_string(r.line()));
        out.push_back(std::move(w));
    }
    return out;
}

// ----------------------------------------------------------- augmented.csv --

namespace {

std::vector<std::string> augmented_header() {
    std::vector<std::string> h = {"id",         "source",    "severity",  "start_time",
                                  "end_time",   "start_lat", "start_lng", "end_lat",
                                  "end_lng",    "distance",  "description", "city", "state",
                                  "closure",    "has_weather", "station_id", "station_lat",
                                  "station_lng", "weather_time", "temperature", "wind_chill",
                                  "humidity",   "pressure",  "visibility", "wind_direction",
                                  "wind_speed", "precipitation", "condition"};
    for (int i = 0; i < kPoiTagCount; ++i)
        h.push_back(std::string("poi_") + kPoiNames[i]);
    h.insert(h.end(), {"day_sunrise_sunset", "day_civil", "day_nautical", "day_astronomical",
                       "road_class", "road_class_resolved", "avg_speed", "travel_time"});
    return h;
}

std::string opt_num(const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
}

}  // namespace

void write_augmented_csv(std::ostream& out, const std::vector<AugmentedEvent>& events) {
    csv::write_row(out, augmented_header());
    for (const auto& a : events) {
        const auto& e = a.raw;
        std::vector<std::string> f;
        f.reserve(50);
        f.push_back(e.id);
        f.push_back(ingest::to_string(e.source));
        f.push_back(std::to_string(e.severity));
        f.push_back(timeutil::format_iso8601(e.start_time));
        f.push_back(e.end_time ? timeutil::format_iso8601(*e.end_time) : "");
        f.push_back(csv::format_double(e.start_lat));
        f.push_back(csv::format_double(e.start_lng));
        f.push_back(opt_num(e.end_lat));
        f.push_back(opt_num(e.end_lng));
        f.push_back(opt_num(e.distance_mi));
        f.push_back(e.description);
        f.push_back(e.city);
        f.push_back(e.state);
        f.push_back(to_string(a.closure));
        f.push_back(a.weather ? "1" : "0");
        if (a.weather) {
            const auto& w = *a.weather;
            f.push_back(w.station_id);
            f.push_back(csv::format_double(w.station_lat));
            f.push_back(csv::format_double(w.station_lng));
            f.push_back(timeutil::format_iso8601(w.time));
            f.push_back(csv::format_double(w.temperature_f));
            f.push_back(opt_num(w.wind_chill_f));
            f.push_back(csv::format_double(w.humidity_pct));
            f.push_back(csv::format_double(w.pressure_inhg));
            f.push_back(csv::format_double(w.visibility_mi));
            f.push_back(w.wind_direction);
            f.push_back(csv::format_double(w.wind_speed_mph));
            f.push_back(csv::format_double(w.precipitation_mm));
            f.push_back(to_string(w.condition));
        } else {
            for (int i = 0; i < 13; ++i) f.push_back("");
        }
        for (int i = 0; i < kPoiTagCount; ++i) f.push_back(a.poi_flags[i] ? "1" : "0");
        for (int i = 0; i < 4; ++i) f.push_back(a.daylight[i] ? "1" : "0");
        f.push_back(to_string(a.road_class));
        f.push_back(a.road_class_resolved ? "1" : "0");
        f.push_back(csv::format_double(a.avg_speed_mph));
        f.push_back(csv::format_double(a.travel_time_min));
        csv::write_row(out, f);
    }
}

std::vector<AugmentedEvent> read_augmented_csv(std::istream& in) {
    csv::Reader r(in);
    const auto h = augmented_header();
    std::vector<int> cols;
    for (const auto& name : h) cols.push_back(require_col(r, name.c_str(), "augmented.csv"));

    std::vector<AugmentedEvent> out;
    std::vector<std::string> f;
    while (r.next(f)) {
        auto get = [&](int i) -> const std::string& { return f[cols[i]]; };
        AugmentedEvent a;
        auto& e = a.raw;
        int i = 0;
        e.id = get(i++);
        e.source = *ingest::source_from_string(get(i++));
        e.severity = static_cast<int>(require_num(get(i++), "augmented.csv", r.line()));
        e.start_time = require_time(get(i++), "augmented.csv", r.line());
        if (const auto& s = get(i++); !s.empty())
            e.end_time = require_time(s, "augmented.csv", r.line());
        e.start_lat = require_num(get(i++), "augmented.csv", r.line());
        e.start_lng = require_num(get(i++), "augmented.csv", r.line());
        if (const auto& s = get(i++); !s.empty())
            e.end_lat = require_num(s, "augmented.csv", r.line());
        if (const auto& s = get(i++); !s.empty())
            e.end_lng = require_num(s, "augmented.csv", r.line());
        if (const auto& s = get(i++); !s.empty())
            e.distance_mi = require_num(s, "augmented.csv", r.line());
        e.description = get(i++);
        e.city = get(i++);
        e.state = get(i++);
        auto closure = closure_from_string(get(i++));
        if (!closure)
            throw std::runtime_error("augmented.csv: bad closure at line " +
                                     std::to_string(r.line()));
        a.closure = *closure;
        const bool has_weather = get(i++) == "1";
        if (has_weather) {
            WeatherObservation w;
            w.station_id = get(i++);
            w.station_lat = require_num(get(i++), "augmented.csv", r.line());
            w.station_lng = require_num(get(i++), "augmented.csv", r.line());
            w.time = require_time(get(i++), "augmented.csv", r.line());
            w.temperature_f = require_num(get(i++), "augmented.csv", r.line());
            if (const auto& s = get(i++); !s.empty())
                w.wind_chill_f = require_num(s, "augmented.csv", r.line());
            w.humidity_pct = require_num(get(i++), "augmented.csv", r.line());
            w.pressure_inhg = require_num(get(i++), "augmented.csv", r.line());
            w.visibility_mi = require_num(get(i++), "augmented.csv", r.line());
            w.wind_direction = get(i++);
            w.wind_speed_mph = require_num(get(i++), "augmented.csv", r.line());
            w.precipitation_mm = require_num(get(i++), "augmented.csv", r.line());
            auto cond = condition_from_string(get(i++));
            if (!cond)
                throw std::runtime_error("augmented.csv: bad condition at line " +
                                         std::to_string(r.line()));
            w.condition = *cond;
            a.weather = std::move(w);
        } else {
            i += 13;
        }
        for (int k = 0; k < kPoiTagCount; ++k) a.poi_flags[k] = get(i++) == "1";
        for (int k = 0; k < 4; ++k) a.daylight[k] = get(i++) == "1";
        auto cls = road_class_from_string(get(i++));
        if (!cls)
            throw std::runtime_error("augmented.csv: bad road_class at line " +
                                     std::to_string(r.line()));
        a.road_class = *cls;
        a.road_class_resolved = get(i++) == "1";
        a.avg_speed_mph = require_num(get(i++), "augmented.csv", r.line());
        a.travel_time_min = require_num(get(i++), "augmented.csv", r.line());
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace roadcast::augment
