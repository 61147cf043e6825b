#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "carpet/error.hpp"
#include "carpet/polygon.hpp"

namespace carpet {

// The four marked boundary arcs, counter-clockwise. Theta1 faces Theta3.
enum class Side : std::uint8_t { theta1 = 0, theta2 = 1, theta3 = 2, theta4 = 3 };

[[nodiscard]] constexpr std::size_t index(Side s) noexcept { return static_cast<std::size_t>(s); }
[[nodiscard]] constexpr Side opposite(Side s) noexcept { return static_cast<Side>((index(s) + 2) % 4); }

struct PeripheralDisk {
    int id = 0;
    Polygon polygon;
    // Filled by make_disk.
    Point center;
    double inradius = 0.0;
    double circumradius = 0.0;
    double diameter = 0.0;
    double area = 0.0;
    Box box;
};

[[nodiscard]] inline PeripheralDisk make_disk(int id, Polygon polygon) {
    PeripheralDisk d;
    d.id = id;
    d.polygon = std::move(polygon);
    const InscribedCircle ic = chebyshev_center(d.polygon);
    d.center = ic.center;
    d.inradius = ic.radius;
    d.circumradius = max_vertex_distance(d.polygon, ic.center);
    d.diameter = carpet::diameter(d.polygon);
    d.area = std::abs(signed_area(d.polygon));
    d.box = bounding_box(d.polygon);
    return d;
}

struct CarpetConfig {
    Polygon outer;                 // counter-clockwise; arc length is measured from outer[0]
    std::array<double, 4> marks{};  // start of Theta1..Theta4 as arc-length fractions
    std::vector<PeripheralDisk> disks;
    std::map<std::string, std::string> meta;
};

// ---------------------------------------------------------------------------
// Marked sides
// ---------------------------------------------------------------------------

struct BoundaryPoint {
    Point point;
    double fraction = 0.0;  // arc-length fraction in [0, 1)
    double distance = 0.0;
};

[[nodiscard]] inline BoundaryPoint nearest_boundary_point(std::span<const Point> outer, Point p) {
    const double total = perimeter(outer);
    BoundaryPoint best;
    best.distance = std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (std::size_t i = 0, n = outer.size(); i < n; ++i) {
        const Point a = outer[i], b = outer[(i + 1) % n];
        const Point q = closest_on_segment(p, a, b);
        const double d = distance(p, q);
        if (d < best.distance) {
            best.distance = d;
            best.point = q;
            best.fraction = (acc + distance(a, q)) / total;
        }
        acc += distance(a, b);
    }
    if (best.fraction >= 1.0) best.fraction -= 1.0;
    return best;
}

[[nodiscard]] inline Side side_of_fraction(const std::array<double, 4>& marks, double f) noexcept {
    for (std::size_t k = 0; k < 4; ++k) {
        const double lo = marks[k];
        const double hi = k + 1 < 4 ? marks[k + 1] : marks[0] + 1.0;
        if ((f >= lo && f < hi) || (f + 1.0 >= lo && f + 1.0 < hi)) return static_cast<Side>(k);
    }
    return Side::theta1;
}

[[nodiscard]] inline Point boundary_point_at(std::span<const Point> outer, double fraction) {
    const double total = perimeter(outer);
    double target = fraction * total;
    for (std::size_t i = 0, n = outer.size(); i < n; ++i) {
        const Point a = outer[i], b = outer[(i + 1) % n];
        const double len = distance(a, b);
        if (target <= len || i + 1 == n) return a + (len > 0 ? std::min(target / len, 1.0) : 0.0) * (b - a);
        target -= len;
    }
    return outer.front();
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

struct Square {
    double x = 0.0;
    double y = 0.0;
    double side = 0.0;
};

[[nodiscard]] inline Polygon square_polygon(const Square& s) {
    return {{s.x, s.y}, {s.x + s.side, s.y}, {s.x + s.side, s.y + s.side}, {s.x, s.y + s.side}};
}

// Rectangle traversed counter-clockwise from its top-left corner, so the
// arcs come out as left, bottom, right, top.
[[nodiscard]] inline Polygon rectangle_outer(const Box& r) {
    return {{r.xmin, r.ymax}, {r.xmin, r.ymin}, {r.xmax, r.ymin}, {r.xmax, r.ymax}};
}

[[nodiscard]] inline std::array<double, 4> rectangle_marks(const Box& r) {
    const double w = r.width(), a = r.height(), p = 2.0 * (w + a);
    return {0.0, a / p, (a + w) / p, (2.0 * a + w) / p};
}

namespace detail {

inline std::vector<PeripheralDisk> disks_from_squares(std::vector<Square> squares) {
    std::stable_sort(squares.begin(), squares.end(), [](const Square& a, const Square& b) {
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        return a.side > b.side;
    });
    std::vector<PeripheralDisk> disks;
    disks.reserve(squares.size());
    for (std::size_t i = 0; i < squares.size(); ++i)
        disks.push_back(make_disk(static_cast<int>(i), square_polygon(squares[i])));
    return disks;
}

}  // namespace detail

// Generation-n Sierpinski carpet in the unit square. The removed middle
// squares of generations 1..n and the surviving level-n cells are all
// peripheral disks, so the disks tile the square.
[[nodiscard]] inline CarpetConfig generate_standard_carpet(int n) {
    if (n < 1) throw Error(ErrorKind::invalid_argument, "standard carpet generation must be >= 1");
    if (n > 7) throw Error(ErrorKind::invalid_argument, "standard carpet generation must be <= 7");
    std::int64_t grid = 1;
    for (int k = 0; k < n; ++k) grid *= 3;
    const double g = static_cast<double>(grid);

    // Integer cell coordinates keep shared edges bit-identical after the
    // division by 3^n.
    using Cell = std::array<std::int64_t, 3>;  // i, j, size
    std::vector<Cell> cells{{0, 0, grid}};
    std::vector<Cell> squares;
    for (int level = 1; level <= n; ++level) {
        std::vector<Cell> next;
        next.reserve(cells.size() * 8);
        for (const auto& [ci, cj, cs] : cells) {
            const std::int64_t s = cs / 3;
            for (std::int64_t b = 0; b < 3; ++b)
                for (std::int64_t a = 0; a < 3; ++a) {
                    const Cell sub{ci + a * s, cj + b * s, s};
                    if (a == 1 && b == 1)
                        squares.push_back(sub);
                    else
                        next.push_back(sub);
                }
        }
        cells = std::move(next);
    }
    squares.insert(squares.end(), cells.begin(), cells.end());
    std::sort(squares.begin(), squares.end(), [](const Cell& a, const Cell& b) {
        if (a[1] != b[1]) return a[1] < b[1];
        return a[0] < b[0];
    });

    CarpetConfig config;
    const Box unit{0.0, 0.0, 1.0, 1.0};
    config.outer = rectangle_outer(unit);
    config.marks = rectangle_marks(unit);
    config.disks.reserve(squares.size());
    for (std::size_t k = 0; k < squares.size(); ++k) {
        const auto [i, j, s] = squares[k];
        const double x0 = static_cast<double>(i) / g, y0 = static_cast<double>(j) / g;
        const double x1 = static_cast<double>(i + s) / g, y1 = static_cast<double>(j + s) / g;
        config.disks.push_back(make_disk(static_cast<int>(k), Polygon{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}));
    }
    config.meta["generator"] = "standard";
    config.meta["generation"] = std::to_string(n);
    return config;
}

// Square carpet from an explicit tiling of an axis-parallel rectangle.
[[nodiscard]] inline CarpetConfig generate_square_carpet(std::span<const Square> tiling, const Box& rect) {
    if (!(rect.width() > 0.0 && rect.height() > 0.0))
        throw Error(ErrorKind::invalid_tiling, "rectangle must have positive width and height");
    const double scale = std::max(rect.width(), rect.height());
    const double tol = 1e-12 * scale;
    double total = 0.0;
    for (std::size_t k = 0; k < tiling.size(); ++k) {
        const Square& s = tiling[k];
        if (!(s.side > 0.0)) throw Error(ErrorKind::invalid_tiling, "square " + std::to_string(k) + " has non-positive side");
        if (s.x < rect.xmin - tol || s.y < rect.ymin - tol || s.x + s.side > rect.xmax + tol ||
            s.y + s.side > rect.ymax + tol)
            throw Error(ErrorKind::invalid_tiling, "square " + std::to_string(k) + " leaves the rectangle");
        total += s.side * s.side;
    }
    const double area = rect.width() * rect.height();
    for (std::size_t a = 0; a < tiling.size(); ++a)
        for (std::size_t b = a + 1; b < tiling.size(); ++b) {
            const Square &p = tiling[a], &q = tiling[b];
            const double w = std::min(p.x + p.side, q.x + q.side) - std::max(p.x, q.x);
            const double h = std::min(p.y + p.side, q.y + q.side) - std::max(p.y, q.y);
            if (w > tol && h > tol && w * h > 1e-12 * area)
                throw Error(ErrorKind::invalid_tiling,
                            "squares " + std::to_string(a) + " and " + std::to_string(b) + " overlap");
        }
    if (std::abs(total - area) > 1e-12 * area)
        throw Error(ErrorKind::invalid_tiling, "squares cover area " + std::to_string(total) + " of " + std::to_string(area));

    CarpetConfig config;
    config.outer = rectangle_outer(rect);
    config.marks = rectangle_marks(rect);
    config.disks = detail::disks_from_squares(std::vector<Square>(tiling.begin(), tiling.end()));
    config.meta["generator"] = "square-tiling";
    return config;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct GeometryReport {
    std::vector<double> k0;        // circumradius / inradius about the Chebyshev center
    std::vector<double> k1;        // sampled-ball area ratio per disk
    std::vector<double> diameters;
    double min_k0 = 0.0;
    double max_k0 = 0.0;
    double min_k1 = 0.0;
    double min_relative_distance = 0.0;  // min dist(A,B) / min(diam A, diam B)
    std::vector<std::string> failures;

    [[nodiscard]] bool ok() const noexcept { return failures.empty(); }
};

namespace detail {

inline bool strictly_inside(std::span<const Point> poly, Point p, double tol) {
    return locate(poly, p, tol) == Location::inside;
}

inline bool interiors_overlap(const PeripheralDisk& a, const PeripheralDisk& b, double tol) {
    const auto& pa = a.polygon;
    const auto& pb = b.polygon;
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (std::size_t j = 0; j < pb.size(); ++j)
            if (segments_cross_properly(pa[i], pa[(i + 1) % pa.size()], pb[j], pb[(j + 1) % pb.size()], 1e-12))
                return true;
    auto probe = [tol](std::span<const Point> p, std::span<const Point> q, Point inner) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (strictly_inside(q, p[i], tol)) return true;
            if (strictly_inside(q, 0.5 * (p[i] + p[(i + 1) % p.size()]), tol)) return true;
        }
        return strictly_inside(q, inner, tol);
    };
    return probe(pa, pb, a.center) || probe(pb, pa, b.center);
}

inline double sampled_fatness(const PeripheralDisk& d) {
    std::vector<Point> samples(d.polygon.begin(), d.polygon.end());
    for (std::size_t i = 0; i < d.polygon.size(); ++i)
        samples.push_back(0.5 * (d.polygon[i] + d.polygon[(i + 1) % d.polygon.size()]));
    samples.push_back(d.center);
    double k1 = std::numeric_limits<double>::infinity();
    for (Point x : samples) {
        double r = d.diameter;
        for (int k = 0; k < 4; ++k, r *= 0.5) k1 = std::min(k1, disk_polygon_area(d.polygon, x, r) / (r * r));
    }
    return k1;
}

}  // namespace detail

[[nodiscard]] inline GeometryReport validate_carpet(const CarpetConfig& config) {
    GeometryReport report;
    auto fail = [&](std::string msg) { report.failures.push_back(std::move(msg)); };

    const auto& m = config.marks;
    bool marks_ok = true;
    for (std::size_t k = 0; k < 4; ++k) {
        if (!(m[k] >= 0.0 && m[k] < 1.0)) marks_ok = false;
        if (k > 0 && !(m[k] > m[k - 1])) marks_ok = false;
    }
    if (!marks_ok) fail("marks: expected four strictly increasing fractions in [0,1)");

    const Box outer_box = bounding_box(config.outer);
    const double scale = std::max({outer_box.width(), outer_box.height(), 1e-300});
    const double tol = 1e-12 * scale;
    if (config.outer.size() < 3 || !is_simple(config.outer, 1e-12)) fail("outer: polygon is not simple");
    if (!(signed_area(config.outer) > 0.0)) fail("outer: polygon is not counter-clockwise with positive area");

    std::set<int> ids;
    const std::size_t n = config.disks.size();
    report.k0.resize(n);
    report.k1.resize(n);
    report.diameters.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PeripheralDisk& d = config.disks[i];
        const std::string tag = "disk " + std::to_string(d.id);
        if (!ids.insert(d.id).second) fail(tag + ": duplicate id");
        if (d.polygon.size() < 3 || !is_simple(d.polygon, 1e-12)) fail(tag + ": polygon is not simple");
        if (!(signed_area(d.polygon) > 0.0)) fail(tag + ": polygon is not counter-clockwise with positive area");
        bool inside = detail::strictly_inside(config.outer, d.center, tol);
        for (Point p : d.polygon)
            if (locate(config.outer, p, tol) == Location::outside) inside = false;
        for (std::size_t a = 0; a < d.polygon.size() && inside; ++a)
            for (std::size_t b = 0; b < config.outer.size(); ++b)
                if (segments_cross_properly(d.polygon[a], d.polygon[(a + 1) % d.polygon.size()], config.outer[b],
                                            config.outer[(b + 1) % config.outer.size()], 1e-12))
                    inside = false;
        if (!inside) fail(tag + ": not contained in the outer domain");
        report.k0[i] = d.inradius > 0.0 ? d.circumradius / d.inradius : std::numeric_limits<double>::infinity();
        report.k1[i] = detail::sampled_fatness(d);
        report.diameters[i] = d.diameter;
    }
    if (n > 0) {
        report.min_k0 = *std::min_element(report.k0.begin(), report.k0.end());
        report.max_k0 = *std::max_element(report.k0.begin(), report.k0.end());
        report.min_k1 = *std::min_element(report.k1.begin(), report.k1.end());
    }

    // Pairwise pass over disks sorted by their left edge.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return config.disks[a].box.xmin < config.disks[b].box.xmin; });
    double max_diam = 0.0;
    for (const auto& d : config.disks) max_diam = std::max(max_diam, d.diameter);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t ai = 0; ai < n; ++ai) {
        const PeripheralDisk& a = config.disks[order[ai]];
        for (std::size_t bi = ai + 1; bi < n; ++bi) {
            const PeripheralDisk& b = config.disks[order[bi]];
            const double dmin = std::min(a.diameter, b.diameter);
            const double gap_x = b.box.xmin - a.box.xmax;
            // Later boxes start even further right.
            if (gap_x > tol && gap_x / max_diam >= best) break;
            const bool boxes_touch = a.box.overlaps(b.box, tol);
            if (boxes_touch && detail::interiors_overlap(a, b, tol)) {
                const auto [lo, hi] = std::minmax(a.id, b.id);
                fail("disks " + std::to_string(lo) + "," + std::to_string(hi) + ": interiors overlap");
            }
            const double gap_y = std::max(b.box.ymin - a.box.ymax, a.box.ymin - b.box.ymax);
            const double lower = std::max({gap_x, gap_y, 0.0}) / dmin;
            if (lower >= best) continue;
            best = std::min(best, polygon_distance(a.polygon, b.polygon) / dmin);
        }
    }
    report.min_relative_distance = n > 1 ? best : 0.0;
    return report;
}

}  // namespace carpet
