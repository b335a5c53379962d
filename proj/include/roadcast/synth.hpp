#pragma once

#include <cstdint>
#include <string>

#include "roadcast/grid.hpp"

namespace roadcast::synth {

/// Desk-scale corpus generator. Cells fall into three planted populations:
/// two "construction-prone" groups whose event probability follows opposite
/// halves of the calendar (and rises with the cell's POI density), and a
/// quiet remainder. Tiles encode the population through the road network:
/// prone cells carry a dense residential grid whose stripe orientation
/// distinguishes the two prone groups, quiet cells a sparse path network.
struct SynthConfig {
    int grid_cols = 10;
    int grid_rows = 10;
    int intervals = 120;
    double prone_fraction = 0.45;
    double p_active = 0.96;   // prone cell, active months, before the POI factor
    double p_inactive = 0.03; // prone cell, off-season
    double p_quiet = 0.02;    // non-prone cells
    double duplicate_rate = 0.01;
    int max_events_per_hit = 3;
    std::uint64_t seed = 7;
};

struct SynthSummary {
    int cells = 0;
    int prone_cells = 0;
    int intervals = 0;
    std::int64_t events_written = 0;
    double expected_rate = 0.0;       // mean planted probability
    double actual_rate = 0.0;         // share of (cell, interval) with >= 1 event
    double prone_label_rate = 0.0;
    double quiet_label_rate = 0.0;
};

struct SynthPaths {
    std::string events_csv;
    std::string weather_csv;
    std::string poi_csv;
    std::string nodes_csv;
    std::string ways_csv;
    std::string manifest_json;  // summary; optional, empty string skips
};

/// Writes the five input files and a summary manifest. Deterministic for a
/// fixed config.
SynthSummary generate(const SynthConfig& cfg, const grid::GridConfig& grid_cfg,
                      const SynthPaths& paths);

}  // namespace roadcast::synth
