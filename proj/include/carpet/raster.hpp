#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "carpet/error.hpp"
#include "carpet/geometry.hpp"

namespace carpet {

// Cell classification of the outer bounding box at pitch h, padded by one
// ring of cells on every side so that the exterior always surrounds the
// domain. Label values: >= 0 disk index, `remainder`, or exterior(side).
struct Raster {
    static constexpr std::int32_t remainder = -1;
    [[nodiscard]] static constexpr std::int32_t exterior(Side s) noexcept {
        return -2 - static_cast<std::int32_t>(index(s));
    }
    [[nodiscard]] static constexpr bool is_exterior(std::int32_t label) noexcept { return label <= -2; }
    [[nodiscard]] static constexpr Side exterior_side(std::int32_t label) noexcept {
        return static_cast<Side>(-2 - label);
    }

    double h = 0.0;
    Point origin;  // lower-left corner of cell (0,0), one pitch outside the box
    int width = 0;
    int height = 0;
    std::vector<std::int32_t> labels;

    [[nodiscard]] bool in_grid(int ix, int iy) const noexcept {
        return ix >= 0 && iy >= 0 && ix < width && iy < height;
    }
    [[nodiscard]] std::int32_t at(int ix, int iy) const noexcept {
        return labels[static_cast<std::size_t>(iy) * static_cast<std::size_t>(width) + static_cast<std::size_t>(ix)];
    }
    [[nodiscard]] Point center(int ix, int iy) const noexcept {
        return {origin.x + (ix + 0.5) * h, origin.y + (iy + 0.5) * h};
    }
    [[nodiscard]] Point corner(int vx, int vy) const noexcept { return {origin.x + vx * h, origin.y + vy * h}; }
};

// Smallest disk extent divided by four; keeps at least four cells across
// every disk.
[[nodiscard]] inline double default_resolution(const CarpetConfig& config) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& d : config.disks) {
        const double s = std::min(d.box.width(), d.box.height());
        if (s > 0.0) m = std::min(m, s);
    }
    if (!std::isfinite(m)) throw Error(ErrorKind::invalid_argument, "carpet has no disk of positive size");
    return m / 4.0;
}

[[nodiscard]] inline Raster rasterize(const CarpetConfig& config, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorKind::invalid_argument, "resolution must be positive");
    const Box box = bounding_box(config.outer);
    Raster r;
    r.h = h;
    const int nx = static_cast<int>(std::ceil(box.width() / h - 1e-9));
    const int ny = static_cast<int>(std::ceil(box.height() / h - 1e-9));
    if (static_cast<double>(nx) * ny > 5.0e7) throw Error(ErrorKind::invalid_argument, "resolution too fine for raster");
    r.width = nx + 2;
    r.height = ny + 2;
    r.origin = {box.xmin - h, box.ymin - h};
    const std::size_t cells = static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.height);
    constexpr std::int32_t unset = std::numeric_limits<std::int32_t>::min();
    r.labels.assign(cells, unset);

    std::vector<char> inside(cells, 0);
    for (int iy = 0; iy < r.height; ++iy)
        for (int ix = 0; ix < r.width; ++ix)
            inside[static_cast<std::size_t>(iy) * r.width + ix] = contains(config.outer, r.center(ix, iy)) ? 1 : 0;

    auto cell_range = [&](const Box& b, double pad, int& x0, int& x1, int& y0, int& y1) {
        x0 = std::max(0, static_cast<int>(std::floor((b.xmin - pad - r.origin.x) / h)));
        y0 = std::max(0, static_cast<int>(std::floor((b.ymin - pad - r.origin.y) / h)));
        x1 = std::min(r.width - 1, static_cast<int>(std::floor((b.xmax + pad - r.origin.x) / h)));
        y1 = std::min(r.height - 1, static_cast<int>(std::floor((b.ymax + pad - r.origin.y) / h)));
    };

    // Pass 1: cell centers inside a disk; the lowest disk index wins.
    for (std::size_t k = 0; k < config.disks.size(); ++k) {
        const auto& d = config.disks[k];
        int x0, x1, y0, y1;
        cell_range(d.box, 0.0, x0, x1, y0, y1);
        for (int iy = y0; iy <= y1; ++iy)
            for (int ix = x0; ix <= x1; ++ix) {
                const std::size_t c = static_cast<std::size_t>(iy) * r.width + ix;
                if (!inside[c] || r.labels[c] != unset) continue;
                if (contains(d.polygon, r.center(ix, iy))) r.labels[c] = static_cast<std::int32_t>(k);
            }
    }

    // Pass 2: unlabeled interior cells within h/2 of a disk join the nearest
    // one. This closes sub-pitch gaps and makes touching disks face-adjacent.
    std::vector<double> best(cells, std::numeric_limits<double>::infinity());
    std::vector<std::int32_t> near(cells, unset);
    for (std::size_t k = 0; k < config.disks.size(); ++k) {
        const auto& d = config.disks[k];
        int x0, x1, y0, y1;
        cell_range(d.box, h, x0, x1, y0, y1);
        for (int iy = y0; iy <= y1; ++iy)
            for (int ix = x0; ix <= x1; ++ix) {
                const std::size_t c = static_cast<std::size_t>(iy) * r.width + ix;
                if (!inside[c] || r.labels[c] != unset) continue;
                const double dist = region_distance(d.polygon, r.center(ix, iy));
                if (dist <= 0.5 * h && dist < best[c]) {
                    best[c] = dist;
                    near[c] = static_cast<std::int32_t>(k);
                }
            }
    }

    for (int iy = 0; iy < r.height; ++iy)
        for (int ix = 0; ix < r.width; ++ix) {
            const std::size_t c = static_cast<std::size_t>(iy) * r.width + ix;
            if (r.labels[c] != unset) continue;
            if (near[c] != unset) {
                r.labels[c] = near[c];
                continue;
            }
            const Point p = r.center(ix, iy);
            const BoundaryPoint bp = nearest_boundary_point(config.outer, p);
            if (!inside[c] || bp.distance <= 0.5 * h)
                r.labels[c] = Raster::exterior(side_of_fraction(config.marks, bp.fraction));
            else
                r.labels[c] = Raster::remainder;
        }
    return r;
}

}  // namespace carpet
