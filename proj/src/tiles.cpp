#include "roadcast/tiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace roadcast::tiles {

Palette Palette::standard() {
    using augment::RoadClass;
    Palette p;
    for (auto& e : p.entries) e = {{128, 128, 128}, 1};
    p.entries[static_cast<int>(RoadClass::Motorway)] = {{0, 0, 255}, 3};
    p.entries[static_cast<int>(RoadClass::Trunk)] = {{255, 0, 0}, 2};
    p.entries[static_cast<int>(RoadClass::Primary)] = {{255, 0, 0}, 2};
    p.entries[static_cast<int>(RoadClass::Secondary)] = {{255, 165, 0}, 2};
    p.entries[static_cast<int>(RoadClass::Tertiary)] = {{255, 165, 0}, 2};
    p.entries[static_cast<int>(RoadClass::Residential)] = {{0, 0, 0}, 1};
    return p;
}

bool tile_covers_cell(const grid::GridConfig& cfg) { return kTileSideM >= 2.0 * cfg.edge_m(); }

namespace {

// Liang-Barsky clip of a segment to [0, max] x [0, max] in pixel coordinates.
bool clip_segment(double max, double& x0, double& y0, double& x1, double& y1) {
    double t0 = 0.0, t1 = 1.0;
    const double dx = x1 - x0, dy = y1 - y0;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {x0 - 0.0, max - x0, y0 - 0.0, max - y0};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;
        } else {
            const double r = q[i] / p[i];
            if (p[i] < 0.0) {
                if (r > t1) return false;
                if (r > t0) t0 = r;
            } else {
                if (r < t0) return false;
                if (r < t1) t1 = r;
            }
        }
    }
    const double nx0 = x0 + t0 * dx, ny0 = y0 + t0 * dy;
    const double nx1 = x0 + t1 * dx, ny1 = y0 + t1 * dy;
    x0 = nx0;
    y0 = ny0;
    x1 = nx1;
    y1 = ny1;
    return true;
}

// Square stamp realizing the palette width: offsets -(w-1)/2 .. w/2.
void stamp(Tile& tile, int row, int col, const PaletteEntry& pe) {
    const int lo = -(pe.width_px - 1) / 2;
    const int hi = pe.width_px / 2;
    for (int dr = lo; dr <= hi; ++dr) {
        for (int dc = lo; dc <= hi; ++dc) {
            const int r = row + dr, c = col + dc;
            if (r >= 0 && r < tile.size && c >= 0 && c < tile.size) tile.set(r, c, pe.color);
        }
    }
}

void bresenham(Tile& tile, int r0, int c0, int r1, int c1, const PaletteEntry& pe) {
    const int dr = std::abs(r1 - r0), dc = std::abs(c1 - c0);
    const int sr = r0 < r1 ? 1 : -1, sc = c0 < c1 ? 1 : -1;
    int err = (dc > dr ? dc : -dr) / 2;
    while (true) {
        stamp(tile, r0, c0, pe);
        if (r0 == r1 && c0 == c1) break;
        const int e2 = err;
        if (e2 > -dc) {
            err -= dr;
            c0 += sc;
        }
        if (e2 < dr) {
            err += dc;
            r0 += sr;
        }
    }
}

}  // namespace

Tile render_tile(const grid::GridConfig& cfg, const grid::HexCell& cell,
                 const augment::RoadNetwork& network, const Palette& palette, int size) {
    Tile tile(size);
    const auto center = grid::cell_center(cfg, cell);
    double cx, cy;
    grid::project(cfg, center.lat, center.lng, cx, cy);
    const double px = kTileSideM / size;
    const double west = cx - kTileSideM / 2.0;
    const double north = cy + kTileSideM / 2.0;

    // planar meters -> continuous pixel coordinates (row grows southward)
    auto to_pixel = [&](double x, double y, double& col, double& row) {
        col = (x - west) / px - 0.5;
        row = (north - y) / px - 0.5;
    };

    std::vector<std::size_t> order(network.ways().size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return network.ways()[a].way_id < network.ways()[b].way_id;
    });

    std::unordered_map<std::int64_t, std::size_t> node_pos;
    for (std::size_t i = 0; i < network.nodes().size(); ++i)
        node_pos[network.nodes()[i].node_id] = i;

    for (std::size_t wi : order) {
        const auto& way = network.ways()[wi];
        const auto& pe = palette.entries[static_cast<int>(way.road_class)];
        for (std::size_t k = 0; k + 1 < way.node_ids.size(); ++k) {
            auto a = node_pos.find(way.node_ids[k]);
            auto b = node_pos.find(way.node_ids[k + 1]);
            if (a == node_pos.end() || b == node_pos.end()) continue;
            const auto& na = network.nodes()[a->second];
            const auto& nb = network.nodes()[b->second];
            double xa, ya, xb, yb;
            grid::project(cfg, na.lat, na.lng, xa, ya);
            grid::project(cfg, nb.lat, nb.lng, xb, yb);
            double c0, r0, c1, r1;
            to_pixel(xa, ya, c0, r0);
            to_pixel(xb, yb, c1, r1);
            if (!clip_segment(static_cast<double>(size - 1), c0, r0, c1, r1)) continue;
            bresenham(tile, static_cast<int>(std::lround(r0)), static_cast<int>(std::lround(c0)),
                      static_cast<int>(std::lround(r1)), static_cast<int>(std::lround(c1)), pe);
        }
    }
    return tile;
}

void save_tile(const Tile& tile, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write tile: " + path);
    out << "P6\n" << tile.size << " " << tile.size << "\n255\n";
    out.write(reinterpret_cast<const char*>(tile.pixels.data()),
              static_cast<std::streamsize>(tile.pixels.size()));
}

Tile load_tile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read tile: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6") throw std::runtime_error(path + ": not a P6 PPM");
    int w = 0, h = 0, maxval = 0;
    in >> w >> h >> maxval;
    if (!in || w <= 0 || h <= 0 || w != h || maxval != 255)
        throw std::runtime_error(path + ": unsupported PPM header");
    in.get();  // single whitespace after maxval
    Tile tile(w);
    in.read(reinterpret_cast<char*>(tile.pixels.data()),
            static_cast<std::streamsize>(tile.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(tile.pixels.size()))
        throw std::runtime_error(path + ": truncated PPM payload");
    return tile;
}

std::string tile_filename(const grid::HexCell& cell) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%d_%d.ppm", cell.q, cell.r);
    return buf;
}

}  // namespace roadcast::tiles
