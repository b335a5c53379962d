#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "roadcast/augment.hpp"
#include "roadcast/grid.hpp"

namespace roadcast::tiles {

/// Ground coverage of a tile, meters: 256 px at 9.547 m/px. Fixed regardless
/// of raster size so a reduced-resolution tile still shows the same area.
inline constexpr double kMetersPerPixelAt256 = 9.547;
inline constexpr double kTileSideM = 256.0 * kMetersPerPixelAt256;

struct Rgb {
    std::uint8_t r = 255, g = 255, b = 255;
    bool operator==(const Rgb&) const = default;
};

struct Tile {
    int size = 256;  // square, row-major RGB, row 0 = north edge
    std::vector<std::uint8_t> pixels;

    explicit Tile(int size_ = 256)
        : size(size_), pixels(static_cast<std::size_t>(size_) * size_ * 3, 255) {}

    Rgb get(int row, int col) const {
        const std::size_t o = (static_cast<std::size_t>(row) * size + col) * 3;
        return {pixels[o], pixels[o + 1], pixels[o + 2]};
    }
    void set(int row, int col, Rgb c) {
        const std::size_t o = (static_cast<std::size_t>(row) * size + col) * 3;
        pixels[o] = c.r;
        pixels[o + 1] = c.g;
        pixels[o + 2] = c.b;
    }
};

struct PaletteEntry {
    Rgb color;
    int width_px = 1;
};

/// Color and line width per road class; every class is covered.
struct Palette {
    std::array<PaletteEntry, augment::kRoadClassCount> entries;
    static Palette standard();
};

/// Rasterizes every way crossing the tile square centered on the cell center.
/// Deterministic: ways drawn in ascending way_id order, Bresenham lines with
/// a square stamp of the palette width.
Tile render_tile(const grid::GridConfig& cfg, const grid::HexCell& cell,
                 const augment::RoadNetwork& network, const Palette& palette, int size = 256);

/// True when the tile square is at least as wide as the cell's circumdiameter
/// (2 * edge); callers emit a coverage warning when it is not.
bool tile_covers_cell(const grid::GridConfig& cfg);

/// Binary PPM (P6, maxval 255). Round-trips byte-for-byte.
void save_tile(const Tile& tile, const std::string& path);
Tile load_tile(const std::string& path);

/// tiles/<q>_<r>.ppm
std::string tile_filename(const grid::HexCell& cell);

}  // namespace roadcast::tiles
