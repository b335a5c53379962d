#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace roadcast::ingest {

enum class Source { MapQuest, Bing };

const char* to_string(Source s);
std::optional<Source> source_from_string(const std::string& s);

/// One raw construction record. Coordinates are degrees, times UTC seconds,
/// distance statute miles. city/state are optional pass-through columns used
/// only by dataset statistics.
struct RawEvent {
    std::string id;
    Source source = Source::Bing;
    int severity = 1;  // 1..4
    std::int64_t start_time = 0;
    std::optional<std::int64_t> end_time;
    double start_lat = 0.0;
    double start_lng = 0.0;
    std::optional<double> end_lat;
    std::optional<double> end_lng;
    std::optional<double> distance_mi;
    std::string description;
    std::string city;
    std::string state;
};

struct RowError {
    std::size_t line = 0;
    std::string reason;
};

struct ParseResult {
    std::vector<RawEvent> events;
    std::vector<RowError> errors;
};

/// Parses the events CSV (header: id,source,severity,start_time,end_time,
/// start_lat,start_lng,end_lat,end_lng,distance,description). Invalid rows
/// become RowError entries; nothing is silently dropped. Extra columns named
/// city/state are carried through, any others ignored.
ParseResult parse_events(std::istream& in);

struct DedupConfig {
    double radius_m = 250.0;
    double window_minutes = 30.0;
};

/// Removes spatiotemporal duplicates: within any pair closer than radius_m
/// and window_minutes, the event with the longer description survives (ties:
/// lexicographically smaller id, then earlier input position). Survivors keep
/// their input order. The result contains no matching pair, so the operation
/// is idempotent.
std::vector<RawEvent> dedup(const std::vector<RawEvent>& events, const DedupConfig& cfg = {});

}  // namespace roadcast::ingest
